"""Plain physics: the base plows into a box and friction brings it to rest.

The base is velocity-commanded; the box responds to penalty contact and
ground friction only (all virtual stiffnesses are zero). The console
trace shows the approach, the shove, and the stop.
"""
import numpy as np

from namo2d.core import Polygon
from namo2d.dynamics import DynamicsModel, ObjectProps

BOX = Polygon([(-0.25, -0.25), (0.25, -0.25), (0.25, 0.25), (-0.25, 0.25)])


def main():
    props = ObjectProps(mass=3.0, inertia=3.0 * 0.5 ** 2 / 6.0,
                        mu_s=0.3, mu_v=0.1, footprint=BOX)
    model = DynamicsModel(robot_radius=0.25, objects=[props])

    x = model.pack_state([-1.0, 0.0, 0.0], np.zeros(3),
                         [[0.5, 0.0, 0.0]], [np.zeros(3)])
    # drive forward for 3 s, then stop and watch the box coast
    U = np.zeros((10, model.n_u))
    U[:6, 0] = 0.6

    print(" t    base x   box x    box vx   gap")
    X = model.rollout(x, U, dt=0.5)
    for i, xi in enumerate(X):
        phi, _, _ = model.edge_signed_distances(xi, 0)
        print(f"{i * 0.5:4.1f}  {xi[0]:7.3f}  {xi[3]:7.3f}  "
              f"{xi[model.v_slice(0)][0]:7.3f}  {phi.min():7.3f}")

    moved = X[-1, 3] - 0.5
    print(f"\nbox displaced {moved:.3f} m and at rest "
          f"(|v| = {np.linalg.norm(X[-1, model.v_slice(0)]):.1e})")


if __name__ == "__main__":
    main()
