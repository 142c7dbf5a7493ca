"""Phase-space escape solver for the 2D Eikonal equation ``|grad u| = n(x, z)``.

With ``|p| = n`` eliminated, phase space is ``(x, z, theta)`` and the
characteristics (rays, parameterised by arclength ``sigma``) obey

    dx/ds = cos(theta),  dz/ds = sin(theta),
    dtheta/ds = (n_z cos(theta) - n_x sin(theta)) / n,   du/ds = n.

For every phase node the solver computes where its ray leaves the
rectangle: exit time ``u``, exit arclength ``sigma``, exit position
``(x, z)`` and exit angle ``theta``.  These satisfy the stationary transport
(escape) equations ``grad_0 T . R = -r`` with zero data on the outflow part of
the boundary, which are marched inward in one pass: a node is computed once
every node its ray lands between is final.
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .grid import Grid2D, NodeState, bilinear_weights, interpolate
from .heap import heap_push, heap_pop
from .stats import SolveStats

FAR, CONSIDERED, ACCEPTED = int(NodeState.FAR), int(NodeState.CONSIDERED), int(NodeState.ACCEPTED)
TWO_PI = 2.0 * math.pi
GRAZE_EPS = 1e-9


@dataclass(frozen=True)
class PhaseGrid3D:
    grid: Grid2D
    ntheta: int

    def __post_init__(self):
        if self.ntheta < 8:
            raise ValueError("need at least 8 angle samples")

    @property
    def htheta(self) -> float:
        return TWO_PI / self.ntheta

    @property
    def theta(self) -> np.ndarray:
        return self.htheta * np.arange(self.ntheta)

    @property
    def shape(self) -> tuple:
        return (self.ntheta, self.grid.ny, self.grid.nx)

    @property
    def size(self) -> int:
        return self.ntheta * self.grid.size

    def index(self, i, j, k) -> int:
        g = self.grid
        return i + g.nx * (j + g.ny * (k % self.ntheta))

    def ijk(self, node):
        g = self.grid
        return node % g.nx, (node // g.nx) % g.ny, node // g.size

    def position(self, i, j, k):
        x, z = self.grid.node(i, j)
        return x, z, self.htheta * (k % self.ntheta)


@dataclass
class SlownessModel:
    """Slowness ``n(x, z) > 0`` on a grid, with node-sampled gradients.

    ``func``/``grad`` optionally keep the analytic model (vectorised callables)
    for use by the ray-tracing oracle.
    """

    grid: Grid2D
    n: np.ndarray
    n_x: np.ndarray = None
    n_z: np.ndarray = None
    func: object = field(default=None, repr=False)
    grad: object = field(default=None, repr=False)
    name: str = "custom"

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(self.n)) or np.any(self.n <= 0):
            raise ValueError("slowness must be finite and strictly positive")
        if self.n_x is None or self.n_z is None:
            # central differences inside, second-order one-sided at the edges
            self.n_z, self.n_x = np.gradient(self.n, self.grid.hy, self.grid.hx, edge_order=2)
        self.n_x = np.asarray(self.n_x, dtype=float).reshape(self.grid.shape)
        self.n_z = np.asarray(self.n_z, dtype=float).reshape(self.grid.shape)

    @classmethod
    def from_function(cls, grid, func, grad=None, name="custom"):
        X, Z = grid.meshgrid()
        n = np.broadcast_to(func(X, Z), grid.shape).astype(float)
        return cls(grid, n, func=func, grad=grad, name=name)

    @classmethod
    def constant(cls, grid, value=1.0):
        value = float(value)
        return cls.from_function(grid, lambda x, z: np.full(np.shape(x), value),
                                 lambda x, z: (np.zeros(np.shape(x)), np.zeros(np.shape(x))),
                                 name=f"const({value:g})")

    def sample(self, x, z):
        """Bilinear ``(n, n_x, n_z)`` at ``(x, z)``."""
        ids, w = bilinear_weights(self.grid, x, z)
        return (interpolate(self.n.ravel(), ids, w), interpolate(self.n_x.ravel(), ids, w),
                interpolate(self.n_z.ravel(), ids, w))


@dataclass
class ArrivalRecord:
    theta: float   # launch angle at the receiver, in (-pi, pi]
    t: float       # travel time
    branch: int    # 0 = first arrival


def char_velocity(model: SlownessModel, x, z, theta):
    """Right-hand side ``(dx, dz, dtheta, du)`` per unit arclength at ``(x, z, theta)``."""
    g = model.grid
    if not (g.xmin - g.hx <= x <= g.xmax + g.hx and g.ymin - g.hy <= z <= g.ymax + g.hy):
        raise ValueError("point outside the model grid")
    n, nx_, nz_ = (float(v) for v in model.sample(x, z))
    if n <= 0:
        raise ValueError("non-positive slowness")
    c, s = math.cos(theta), math.sin(theta)
    return c, s, (nz_ * c - nx_ * s) / n, n


# ---------------------------------------------------------------------------
# kernels

@njit(cache=True)
def _sign(v):
    if v > GRAZE_EPS:
        return 1
    if v < -GRAZE_EPS:
        return -1
    return 0


@njit(cache=True)
def _is_outflow(i, j, nx, ny, c, s):
    return ((i == 0 and c < -GRAZE_EPS) or (i == nx - 1 and c > GRAZE_EPS)
            or (j == 0 and s < -GRAZE_EPS) or (j == ny - 1 and s > GRAZE_EPS))


@njit(cache=True)
def _stencil(i, j, k, nx, ny, nth, hx, hz, hth, c, s, w, ids, wts):
    """Face crossed first by the ray leaving node (i, j, k) and the bilinear
    weights of the landing point on that face.  Returns ``(dsigma, count)``."""
    si = _sign(c)
    sj = _sign(s)
    sk = _sign(w)
    tx = hx / abs(c) if si != 0 else np.inf
    tz = hz / abs(s) if sj != 0 else np.inf
    tt = hth / abs(w) if sk != 0 else np.inf
    d = min(tx, tz, tt)
    # offsets (per axis) of the base node on the exit face and transverse fractions
    bi, bj, bk = 0, 0, 0
    if d == tx:
        bi = si
        f1 = min(abs(s) * d / hz, 1.0)
        f2 = min(abs(w) * d / hth, 1.0)
        # transverse axes: z then theta
        d1i, d1j, d1k = 0, sj, 0
        d2i, d2j, d2k = 0, 0, sk
    elif d == tz:
        bj = sj
        f1 = min(abs(c) * d / hx, 1.0)
        f2 = min(abs(w) * d / hth, 1.0)
        d1i, d1j, d1k = si, 0, 0
        d2i, d2j, d2k = 0, 0, sk
    else:
        bk = sk
        f1 = min(abs(c) * d / hx, 1.0)
        f2 = min(abs(s) * d / hz, 1.0)
        d1i, d1j, d1k = si, 0, 0
        d2i, d2j, d2k = 0, sj, 0
    if d1i == 0 and d1j == 0 and d1k == 0:
        f1 = 0.0
    if d2i == 0 and d2j == 0 and d2k == 0:
        f2 = 0.0
    m = 0
    for a in range(2):
        for b in range(2):
            wa = f1 if a == 1 else 1.0 - f1
            wb = f2 if b == 1 else 1.0 - f2
            wt = wa * wb
            if wt <= 0.0:
                continue
            ii = i + bi + a * d1i + b * d2i
            jj = j + bj + a * d1j + b * d2j
            kk = (k + bk + a * d1k + b * d2k) % nth
            ids[m] = ii + nx * (jj + ny * kk)
            wts[m] = wt
            m += 1
    return d, m


@njit(cache=True)
def _candidate(node, p, ids, wts, m, dsig, nval, u, sig, xe, ze, te):
    uu = dsig * nval[p]
    ss = dsig
    xx = 0.0
    zz = 0.0
    tt = 0.0
    ref = te[ids[0]]
    for q in range(m):
        s_ = ids[q]
        w_ = wts[q]
        uu += w_ * u[s_]
        ss += w_ * sig[s_]
        xx += w_ * xe[s_]
        zz += w_ * ze[s_]
        dt = te[s_] - ref
        dt -= TWO_PI * math.floor(dt / TWO_PI + 0.5)
        tt += w_ * (ref + dt)
    tt -= TWO_PI * math.floor(tt / TWO_PI)
    return uu, ss, xx, zz, tt


@njit(cache=True)
def _escape_kernel(nval, gx, gz, nx, ny, nth, xmin, zmin, hx, hz):
    nxy = nx * ny
    N = nxy * nth
    hth = TWO_PI / nth
    st_ids = np.full((N, 4), -1, dtype=np.int64)
    st_w = np.zeros((N, 4))
    st_m = np.zeros(N, dtype=np.int64)
    dsig = np.full(N, np.inf)
    outflow = np.zeros(N, dtype=np.bool_)
    for k in range(nth):
        th = hth * k
        c = math.cos(th)
        s = math.sin(th)
        for j in range(ny):
            for i in range(nx):
                p = i + nx * j
                node = p + nxy * k
                if _is_outflow(i, j, nx, ny, c, s):
                    outflow[node] = True
                    continue
                w = (gz[p] * c - gx[p] * s) / nval[p]
                d, m = _stencil(i, j, k, nx, ny, nth, hx, hz, hth, c, s, w,
                                st_ids[node], st_w[node])
                dsig[node] = d
                st_m[node] = m
    pending = st_m.copy()

    u = np.full(N, np.inf)
    sig = np.full(N, np.inf)
    xe = np.full(N, np.nan)
    ze = np.full(N, np.nan)
    te = np.full(N, np.nan)
    state = np.zeros(N, dtype=np.int8)
    heap = np.empty(N, dtype=np.int64)
    pos = np.full(N, -1, dtype=np.int64)
    keys = np.full(N, np.inf)
    order = np.empty(N, dtype=np.int64)
    acc_keys = np.empty(N)
    violations = 0
    n_acc = 0
    n = 0

    seeds = np.flatnonzero(outflow)
    for node in seeds:
        p = node % nxy
        k = node // nxy
        state[node] = ACCEPTED
        u[node] = 0.0
        sig[node] = 0.0
        xe[node] = xmin + hx * (p % nx)
        ze[node] = zmin + hz * (p // nx)
        te[node] = hth * k
        keys[node] = 0.0
        order[n_acc] = node
        acc_keys[n_acc] = 0.0
        n_acc += 1
    seeded = n_acc

    pops = 0
    t = 0
    while True:
        if t < seeded:
            x_node = order[t]
            t += 1
        elif n > 0:
            x_node, n = heap_pop(heap, pos, keys, n)
            pops += 1
            if state[x_node] != CONSIDERED:
                violations += 1
            state[x_node] = ACCEPTED
            order[n_acc] = x_node
            acc_keys[n_acc] = keys[x_node]
            n_acc += 1
        else:
            break
        # release the nodes whose landing stencil contains x_node
        xp = x_node % nxy
        xi = xp % nx
        xj = xp // nx
        xk = x_node // nxy
        for dk in range(-1, 2):
            kk = (xk + dk) % nth
            for dj in range(-1, 2):
                jj = xj + dj
                if jj < 0 or jj >= ny:
                    continue
                for di in range(-1, 2):
                    ii = xi + di
                    if ii < 0 or ii >= nx or (di == 0 and dj == 0 and dk == 0):
                        continue
                    y = ii + nx * jj + nxy * kk
                    if state[y] != FAR:
                        continue
                    hit = False
                    for q in range(st_m[y]):
                        if st_ids[y, q] == x_node:
                            hit = True
                    if not hit:
                        continue
                    pending[y] -= 1
                    if pending[y] > 0:
                        continue
                    yp = y % nxy
                    uu, ss, xx, zz, tt = _candidate(y, yp, st_ids[y], st_w[y], st_m[y], dsig[y],
                                                    nval, u, sig, xe, ze, te)
                    u[y] = uu
                    sig[y] = ss
                    xe[y] = xx
                    ze[y] = zz
                    te[y] = tt
                    key = uu
                    for q in range(st_m[y]):
                        kq = keys[st_ids[y, q]]
                        if kq > key:
                            key = kq
                    state[y] = CONSIDERED
                    n = heap_push(heap, pos, keys, n, y, key)
    return (u, sig, xe, ze, te, order[:n_acc], acc_keys[:n_acc], pops, seeded, violations)


# ---------------------------------------------------------------------------

@dataclass
class EscapeSolution:
    phase: PhaseGrid3D
    u: np.ndarray          # exit time
    sigma: np.ndarray      # exit arclength
    x_exit: np.ndarray
    z_exit: np.ndarray
    theta_exit: np.ndarray
    stats: SolveStats = None

    FIELDS = ("u", "sigma", "x_exit", "z_exit", "theta_exit")

    @property
    def grid(self) -> Grid2D:
        return self.phase.grid

    def fields(self):
        return {name: getattr(self, name) for name in self.FIELDS}

    def ring(self, x, z):
        """All five fields on the angle ring at ``(x, z)``, bilinear in space.

        Returns a dict of arrays of length ``ntheta``; ``theta_exit`` is
        interpolated on the circle.
        """
        ids, w = bilinear_weights(self.grid, x, z)
        nz = w > 0
        ids, w = ids[nz], w[nz]
        out = {}
        for name in ("u", "sigma", "x_exit", "z_exit"):
            a = getattr(self, name).reshape(self.phase.ntheta, -1)
            out[name] = a[:, ids] @ w
        te = np.exp(1j * self.theta_exit.reshape(self.phase.ntheta, -1)[:, ids])
        out["theta_exit"] = np.mod(np.angle(te @ w), TWO_PI)
        return out

    def value_at(self, x, z, theta, name="u"):
        """Bilinear in space, linear in angle."""
        r = self.ring(x, z)[name]
        s = (theta % TWO_PI) / self.phase.htheta
        k = int(math.floor(s)) % self.phase.ntheta
        f = s - math.floor(s)
        k1 = (k + 1) % self.phase.ntheta
        if f == 0.0:
            return float(r[k])
        return float((1 - f) * r[k] + f * r[k1])


def escape_solve(phase: PhaseGrid3D, model: SlownessModel) -> EscapeSolution:
    """March the escape equations inward from the outflow boundary."""
    g = phase.grid
    if model.grid != g:
        raise ValueError("model and phase grid disagree")
    t0 = time.perf_counter()
    u, sig, xe, ze, te, order, keys, pops, seeded, viol = _escape_kernel(
        np.ascontiguousarray(model.n.ravel()), np.ascontiguousarray(model.n_x.ravel()),
        np.ascontiguousarray(model.n_z.ravel()), g.nx, g.ny, phase.ntheta,
        g.xmin, g.ymin, g.hx, g.hy)
    stats = SolveStats(phase.size, int(pops), int(seeded), order, keys, int(viol),
                       unreachable=int(np.count_nonzero(~np.isfinite(u))),
                       wall_time=time.perf_counter() - t0, values=u[order])
    shp = phase.shape
    return EscapeSolution(phase, u.reshape(shp), sig.reshape(shp), xe.reshape(shp),
                          ze.reshape(shp), te.reshape(shp), stats)


def escape_local_update(phase: PhaseGrid3D, model: SlownessModel, node, fields, accepted):
    """Candidate ``(u, sigma, x_exit, z_exit, theta_exit)`` for one phase node.

    ``node`` is an ``(i, j, k)`` triple, ``fields`` a mapping with the five
    flat (or phase-shaped) arrays and ``accepted`` a boolean mask.  Returns
    ``None`` while some landing node with non-zero weight is not accepted.
    Outflow nodes return their boundary data.
    """
    g = phase.grid
    i, j, k = node
    k %= phase.ntheta
    th = phase.htheta * k
    c, s = math.cos(th), math.sin(th)
    if _is_outflow(i, j, g.nx, g.ny, c, s):
        x, z = g.node(i, j)
        return 0.0, 0.0, x, z, th
    p = i + g.nx * j
    nval = model.n.ravel()
    w = (model.n_z.ravel()[p] * c - model.n_x.ravel()[p] * s) / nval[p]
    ids = np.full(4, -1, dtype=np.int64)
    wts = np.zeros(4)
    d, m = _stencil(i, j, k, g.nx, g.ny, phase.ntheta, g.hx, g.hy, phase.htheta, c, s, w, ids, wts)
    acc = np.asarray(accepted).ravel()
    if not all(acc[ids[q]] for q in range(m)):
        return None
    flat = {name: np.ascontiguousarray(np.asarray(fields[name], dtype=float).ravel())
            for name in EscapeSolution.FIELDS}
    return tuple(float(v) for v in _candidate(phase.index(i, j, k), p, ids, wts, m, d, nval,
                                              flat["u"], flat["sigma"], flat["x_exit"],
                                              flat["z_exit"], flat["theta_exit"]))


def landing_stencil(phase: PhaseGrid3D, model: SlownessModel, node):
    """``(dsigma, ids, weights)`` of the face interpolation used for ``node``."""
    g = phase.grid
    i, j, k = node
    th = phase.htheta * (k % phase.ntheta)
    c, s = math.cos(th), math.sin(th)
    if _is_outflow(i, j, g.nx, g.ny, c, s):
        return 0.0, np.empty(0, dtype=np.int64), np.empty(0)
    p = i + g.nx * j
    w = (model.n_z.ravel()[p] * c - model.n_x.ravel()[p] * s) / model.n.ravel()[p]
    ids = np.full(4, -1, dtype=np.int64)
    wts = np.zeros(4)
    d, m = _stencil(i, j, k % phase.ntheta, g.nx, g.ny, phase.ntheta, g.hx, g.hy,
                    phase.htheta, c, s, w, ids, wts)
    return float(d), ids[:m], wts[:m]


# ---------------------------------------------------------------------------
# post-processing

def boundary_arclength(grid: Grid2D, x, z):
    """Counter-clockwise arclength from ``(xmin, zmin)`` of the boundary point
    nearest to ``(x, z)``.  Vectorised."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    Lx = grid.xmax - grid.xmin
    Lz = grid.ymax - grid.ymin
    d = np.stack([z - grid.ymin, grid.xmax - x, grid.ymax - z, x - grid.xmin])
    wall = np.argmin(np.abs(d), axis=0)
    xc = np.clip(x, grid.xmin, grid.xmax) - grid.xmin
    zc = np.clip(z, grid.ymin, grid.ymax) - grid.ymin
    s = np.choose(wall, [xc, Lx + zc, Lx + Lz + (Lx - xc), 2 * Lx + Lz + (Lz - zc)])
    return s


def perimeter(grid: Grid2D) -> float:
    return 2.0 * ((grid.xmax - grid.xmin) + (grid.ymax - grid.ymin))


def extract_arrivals(sol: EscapeSolution, receiver, source, max_jump=0.25):
    """All rays from ``source`` (on the boundary) reaching ``receiver``.

    Scans the angle ring at the receiver for launch angles whose exit point
    crosses the source.  Adjacent ring samples whose exit points jump by more
    than ``max_jump`` of the perimeter are treated as a discontinuity (ray
    grazing a wall), not a crossing.  Records are sorted by time.
    """
    g = sol.grid
    rx, rz = float(receiver[0]), float(receiver[1])
    if not (g.xmin < rx < g.xmax and g.ymin < rz < g.ymax):
        raise ValueError("receiver must lie strictly inside the domain")
    sx, sz = float(source[0]), float(source[1])
    tol = 1e-9 * max(g.xmax - g.xmin, g.ymax - g.ymin)
    on_wall = (min(abs(sx - g.xmin), abs(sx - g.xmax)) <= tol
               or min(abs(sz - g.ymin), abs(sz - g.ymax)) <= tol)
    if not on_wall or not g.contains(sx, sz):
        raise ValueError("source must lie on the domain boundary")
    P = perimeter(g)
    ring = sol.ring(rx, rz)
    u = ring["u"]
    s_exit = boundary_arclength(g, ring["x_exit"], ring["z_exit"])
    s_src = float(boundary_arclength(g, sx, sz))
    d = np.mod(s_exit - s_src + 0.5 * P, P) - 0.5 * P
    th = sol.phase.theta
    nth = sol.phase.ntheta
    out = []
    for k in range(nth):
        k1 = (k + 1) % nth
        if not (np.isfinite(u[k]) and np.isfinite(u[k1])):
            continue
        d0, d1 = d[k], d[k1]
        if not ((d0 <= 0 < d1) or (d1 <= 0 < d0)):
            continue
        # a sign change of the wrapped offset across the antipode of the
        # source is not a crossing, nor is a jump of the exit point
        if abs(d1 - d0) > max_jump * P:
            continue
        f = d0 / (d0 - d1)
        theta = th[k] + f * sol.phase.htheta
        theta = math.remainder(theta, TWO_PI)
        if theta == -math.pi:
            theta = math.pi
        out.append((float((1 - f) * u[k] + f * u[k1]), theta))
    out.sort()
    return [ArrivalRecord(theta=th_, t=t_, branch=b) for b, (t_, th_) in enumerate(out)]


def isochron(sol: EscapeSolution, T):
    """Points ``(x, z, theta)`` on phase-grid edges where ``u`` crosses ``T``.

    The spatial projection is the (possibly self-intersecting) front that
    has travelled inward from the boundary for time ``T``.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    u = sol.u
    ph = sol.phase
    g = ph.grid
    X, Z = g.meshgrid()
    Th = ph.theta[:, None, None] * np.ones(ph.shape)
    X = np.broadcast_to(X, ph.shape)
    Z = np.broadcast_to(Z, ph.shape)
    pts = []
    for axis in (2, 1, 0):
        if axis == 0:
            a, b = u, np.roll(u, -1, axis=0)
            pa = (X, Z, Th)
            pb = (X, Z, Th + ph.htheta)
        else:
            sl_a = [slice(None)] * 3
            sl_b = [slice(None)] * 3
            sl_a[axis] = slice(0, -1)
            sl_b[axis] = slice(1, None)
            sl_a, sl_b = tuple(sl_a), tuple(sl_b)
            a, b = u[sl_a], u[sl_b]
            pa = (X[sl_a], Z[sl_a], Th[sl_a])
            pb = (X[sl_b], Z[sl_b], Th[sl_b])
        with np.errstate(invalid="ignore"):
            hit = np.isfinite(a) & np.isfinite(b) & (((a <= T) & (T < b)) | ((b <= T) & (T < a)))
            f = np.where(hit, (T - a) / np.where(hit, b - a, 1.0), 0.0)
        f = f[hit]
        pts.append(np.column_stack([pa[c][hit] + f * (pb[c][hit] - pa[c][hit]) for c in range(3)]))
    out = np.concatenate(pts) if pts else np.empty((0, 3))
    out[:, 2] = np.mod(out[:, 2], TWO_PI)
    return out


def worker_count(default=None) -> int:
    """Thread cap for post-processing, from ``HJKIT_THREADS`` when set."""
    env = os.environ.get("HJKIT_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"HJKIT_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"HJKIT_THREADS must be a positive integer, got {env!r}")
        return n
    return default or min(8, os.cpu_count() or 1)


def extract_arrivals_many(sol: EscapeSolution, receivers, source, threads=None, **kw):
    """:func:`extract_arrivals` for many receivers; the solution is only read."""
    receivers = [tuple(r) for r in receivers]
    n = threads or worker_count()
    if n == 1 or len(receivers) < 2:
        return [extract_arrivals(sol, r, source, **kw) for r in receivers]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(lambda r: extract_arrivals(sol, r, source, **kw), receivers))
