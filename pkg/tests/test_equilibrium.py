import math

import numpy as np
import pytest
from scipy.optimize import linprog

from chainplan.equilibrium import (ContactSet, PlacementParams, constraint_violation,
                                   environment_contacts, equilibrium_feasible,
                                   gravito_inertial_wrench, placement_equilibrium, placement_ok,
                                   sample_placement_config, wrench_residual)
from chainplan.geometry import PlanarPose
from oracles import grid_equilibrium, interval_equilibrium


def random_instance(rng, n_contacts):
    cs = ContactSet()
    for i in range(n_contacts):
        p = rng.uniform(-0.3, 0.3, 2)
        if rng.random() < 0.6:
            a = rng.uniform(math.pi / 4, 3 * math.pi / 4)
            cs.add_env(p, (math.cos(a), math.sin(a)))
        else:
            cs.add_grasp(p, i)
    w = gravito_inertial_wrench(rng.uniform(0.2, 3.0), rng.uniform(-0.2, 0.2, 2))
    return w, cs, rng.uniform(0.1, 1.0), rng.uniform(1.0, 30.0)


def linprog_feasible(w, cs, mu, fmax):
    # variables (fx, fy) per contact, free sign; constraints written directly
    n = len(cs)
    A_eq = np.zeros((3, 2 * n))
    for i, p in enumerate(cs.points):
        A_eq[:, 2 * i] = (1.0, 0.0, -p[1])
        A_eq[:, 2 * i + 1] = (0.0, 1.0, p[0])
    A_ub, b_ub = [], []
    for i, (kind, nrm) in enumerate(zip(cs.kinds, cs.normals)):
        if kind == "env":
            t = (-nrm[1], nrm[0])
            for sgn in (1, -1):
                row = np.zeros(2 * n)
                # sgn * f.t - mu f.n <= 0
                row[2 * i] = sgn * t[0] - mu * nrm[0]
                row[2 * i + 1] = sgn * t[1] - mu * nrm[1]
                A_ub.append(row)
                b_ub.append(0.0)
            row = np.zeros(2 * n)
            row[2 * i], row[2 * i + 1] = -nrm[0], -nrm[1]
            A_ub.append(row)
            b_ub.append(0.0)
    bounds = [(-fmax, fmax) if cs.kinds[j // 2] != "env" else (None, None) for j in range(2 * n)]
    res = linprog(np.zeros(2 * n), A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                  A_eq=A_eq, b_eq=[w.force[0], w.force[1], w.moment], bounds=bounds, method="highs")
    return res.status == 0


def test_wrench_sign():
    w = gravito_inertial_wrench(2.0, (0.1, 0.0))
    assert w.force == pytest.approx((0.0, 19.62))
    assert w.moment == pytest.approx(0.1 * 19.62)
    with pytest.raises(ValueError):
        gravito_inertial_wrench(0.0, (0, 0))


def test_single_contact_under_com():
    cs = ContactSet()
    cs.add_env((0.0, 0.0), (0.0, 1.0))
    assert equilibrium_feasible(gravito_inertial_wrench(1.0, (0.0, 0.1)), cs, 0.5, 10.0)
    assert not equilibrium_feasible(gravito_inertial_wrench(1.0, (0.05, 0.1)), cs, 0.5, 10.0)


def test_grip_limit_binds():
    cs = ContactSet()
    cs.add_grasp((0.0, 0.0), 0)
    w = gravito_inertial_wrench(1.0, (0.0, 0.0))
    assert equilibrium_feasible(w, cs, 0.5, 9.8).feasible is False
    assert equilibrium_feasible(w, cs, 0.5, 9.82).feasible is True


def test_empty_contacts_rejected():
    with pytest.raises(ValueError):
        equilibrium_feasible(gravito_inertial_wrench(1.0, (0, 0)), ContactSet(), 0.5, 1.0)


def test_agrees_with_interval_oracle(rng):
    for _ in range(300):
        inst = random_instance(rng, int(rng.integers(1, 3)))
        assert bool(equilibrium_feasible(*inst)) == interval_equilibrium(*inst)


def test_agrees_with_grid_oracle(rng):
    for _ in range(60):
        inst = random_instance(rng, int(rng.integers(1, 3)))
        assert bool(equilibrium_feasible(*inst)) == grid_equilibrium(*inst)


def test_agrees_with_linprog(rng):
    for _ in range(150):
        inst = random_instance(rng, int(rng.integers(1, 6)))
        assert bool(equilibrium_feasible(*inst)) == linprog_feasible(*inst)


def test_witness_forces(rng):
    seen = 0
    for _ in range(200):
        w, cs, mu, fmax = random_instance(rng, int(rng.integers(1, 6)))
        r = equilibrium_feasible(w, cs, mu, fmax)
        if r:
            seen += 1
            assert wrench_residual(w, cs, r.forces) < 1e-8
            assert constraint_violation(cs, r.forces, mu, fmax) < 1e-8
        else:
            assert r.forces is None
    assert seen > 20


def test_environment_contacts_on_floor(elbow_flip):
    T = PlanarPose(0.2, 0.05, 0.0)
    contacts = environment_contacts(T, elbow_flip.world)
    assert sorted(round(v[0], 9) for v, _ in contacts) == [0.05, 0.35]
    assert environment_contacts(PlanarPose(0.2, 0.06, 0.0), elbow_flip.world) == []


def test_placement_equilibrium_flat_bar(elbow_flip):
    T = PlanarPose(0.0, 0.05, 0.0)
    assert placement_equilibrium(T, elbow_flip.world, elbow_flip.grasps, [1])
    assert placement_equilibrium(T, elbow_flip.world, elbow_flip.grasps, [0])
    assert not placement_equilibrium(PlanarPose(0.0, 0.2, 0.0), elbow_flip.world, elbow_flip.grasps, [0])


def test_floor_gap_no_placement(floor_gap):
    # with the floor starting at x = -0.02, a bar centred at -0.3 hangs off the edge
    T = PlanarPose(-0.3, 0.05, 0.0)
    assert not environment_contacts(T, floor_gap.world)
    assert not placement_ok(T, floor_gap.world, floor_gap.grasps, [0, 1])


def test_sample_placement(elbow_flip, rng):
    for x in (-0.1, 0.0, 0.1):
        T = sample_placement_config(PlanarPose(x, 0.12, 0.1), elbow_flip.world, elbow_flip.grasps, rng)
        assert T is not None
        assert placement_ok(T, elbow_flip.world, elbow_flip.grasps, [0, 1])
        assert abs(T.theta) < 1e-9  # edge aligned with the flat floor
        assert T.y == pytest.approx(0.05, abs=1e-9)


def test_sample_placement_no_support(rng):
    from chainplan.testbed import GRASPS, testbed_world
    world = testbed_world(floor=None)
    assert sample_placement_config(PlanarPose(0, 0.12, 0), world, GRASPS, rng,
                                   params=PlacementParams(max_iters=5)) is None
