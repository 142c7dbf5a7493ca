"""All arrivals, not just the first, from a phase-space escape solve.

Each phase point (x, z, theta) records where its ray leaves the square and
how long that takes.  A receiver sees the source once for every launch angle
whose ray exits at the source, so counting crossings around the angle ring
gives every arrival.  In a medium with a fast channel at z = 1/2, rays from
a source near the bottom wall turn back and cross, and a receiver near the
opposite bottom corner hears three arrivals.
"""
import math

from hjkit import Grid2D, PhaseGrid3D, SlownessModel, builtin_model, escape_solve, extract_arrivals
from hjkit.oracles import trace_ray

g = Grid2D(101, 101)
wg = builtin_model("waveguide")
model = SlownessModel.from_function(g, wg.slowness, wg.slowness_grad)
sol = escape_solve(PhaseGrid3D(g, 128), model)
print(sol.stats.summary())

receiver, source = (0.95, 0.05), (0.0, 0.1)
print(f"\narrivals at {receiver} from {source}:")
for a in extract_arrivals(sol, receiver, source):
    # shoot the ray back to check where it really lands
    ray = trace_ray(model, *receiver, a.theta, step=0.002)
    print(f"  branch {a.branch}: theta = {math.degrees(a.theta):7.2f} deg, t = {a.t:.4f}"
          f"   ray lands at z = {ray.exit_z:.4f}, t = {ray.exit_u:.4f}")

# the homogeneous square never produces more than one
one = escape_solve(PhaseGrid3D(Grid2D(51, 51), 64), SlownessModel.constant(Grid2D(51, 51)))
print("\nhomogeneous:", extract_arrivals(one, (0.5, 0.5), (0.5, 0.0)))
