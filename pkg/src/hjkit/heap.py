"""Indexed binary min-heap with decrease-key.

The heap lives in three arrays so the same routines serve the compiled
solver kernels and the :class:`IndexedMinHeap` wrapper:

* ``heap[0:n]`` -- node ids in heap order
* ``pos[id]``   -- slot of ``id`` in ``heap`` or ``-1`` when absent
* ``keys[id]``  -- current priority of ``id``

Equal keys are ordered by the smaller node id.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _less(keys, a, b):
    ka = keys[a]
    kb = keys[b]
    return ka < kb or (ka == kb and a < b)


@njit(cache=True)
def _sift_up(heap, pos, keys, slot):
    node = heap[slot]
    while slot > 0:
        parent = (slot - 1) >> 1
        p = heap[parent]
        if not _less(keys, node, p):
            break
        heap[slot] = p
        pos[p] = slot
        slot = parent
    heap[slot] = node
    pos[node] = slot


@njit(cache=True)
def _sift_down(heap, pos, keys, slot, n):
    node = heap[slot]
    while True:
        child = 2 * slot + 1
        if child >= n:
            break
        right = child + 1
        if right < n and _less(keys, heap[right], heap[child]):
            child = right
        c = heap[child]
        if not _less(keys, c, node):
            break
        heap[slot] = c
        pos[c] = slot
        slot = child
    heap[slot] = node
    pos[node] = slot


@njit(cache=True)
def heap_push(heap, pos, keys, n, node, key):
    """Insert ``node`` or lower its key.  Returns the new heap size.

    A key larger than the stored one is ignored.
    """
    slot = pos[node]
    if slot >= 0:
        if key < keys[node]:
            keys[node] = key
            _sift_up(heap, pos, keys, slot)
        return n
    keys[node] = key
    heap[n] = node
    pos[node] = n
    _sift_up(heap, pos, keys, n)
    return n + 1


@njit(cache=True)
def heap_pop(heap, pos, keys, n):
    """Remove the minimum.  Returns ``(node, new_size)``."""
    top = heap[0]
    pos[top] = -1
    n -= 1
    if n > 0:
        last = heap[n]
        heap[0] = last
        pos[last] = 0
        _sift_down(heap, pos, keys, 0, n)
    return top, n


def new_heap_arrays(capacity):
    return (np.empty(capacity, dtype=np.int64),
            np.full(capacity, -1, dtype=np.int64),
            np.full(capacity, np.inf))


class IndexedMinHeap:
    """Priority queue over integer ids ``0 <= id``.

    >>> h = IndexedMinHeap()
    >>> h.push(7, 3.0); h.push(7, 2.0)
    True
    True
    >>> h.pop()
    (7, 2.0)
    """

    def __init__(self, capacity=16):
        self._heap, self._pos, self._keys = new_heap_arrays(max(int(capacity), 1))
        self._n = 0

    def _grow(self, node):
        cap = len(self._pos)
        new_cap = max(2 * cap, node + 1)
        heap, pos, keys = new_heap_arrays(new_cap)
        heap[:self._n] = self._heap[:self._n]
        pos[:cap] = self._pos
        keys[:cap] = self._keys
        self._heap, self._pos, self._keys = heap, pos, keys

    def push(self, node, key) -> bool:
        """Insert ``node`` with ``key`` or decrease its key.

        Returns ``True`` if the stored key changed; an increase is ignored
        and returns ``False``.
        """
        node = int(node)
        key = float(key)
        if node < 0:
            raise ValueError("heap ids must be non-negative")
        if not np.isfinite(key):
            raise ValueError("heap keys must be finite")
        if node >= len(self._pos):
            self._grow(node)
        if self._pos[node] >= 0 and key >= self._keys[node]:
            return False
        self._n = heap_push(self._heap, self._pos, self._keys, self._n, node, key)
        return True

    insert_or_decrease = push

    def pop(self):
        if self._n == 0:
            raise IndexError("pop from empty heap")
        node, self._n = heap_pop(self._heap, self._pos, self._keys, self._n)
        return int(node), float(self._keys[node])

    def peek(self):
        if self._n == 0:
            raise IndexError("peek at empty heap")
        node = int(self._heap[0])
        return node, float(self._keys[node])

    def key(self, node):
        if not self.__contains__(node):
            raise KeyError(node)
        return float(self._keys[node])

    def __contains__(self, node):
        node = int(node)
        return 0 <= node < len(self._pos) and self._pos[node] >= 0

    def __len__(self):
        return self._n

    def __bool__(self):
        return self._n > 0

    def check(self) -> bool:
        """Verify the heap property and the position index."""
        heap, pos, keys, n = self._heap, self._pos, self._keys, self._n
        for s in range(n):
            if pos[heap[s]] != s:
                return False
            if s > 0 and _less(keys, heap[s], heap[(s - 1) // 2]):
                return False
        return int(np.count_nonzero(pos >= 0)) == n
