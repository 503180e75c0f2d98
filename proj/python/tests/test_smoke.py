# Copyright (c) 2026, The jwdm authors
# SPDX-License-Identifier: Apache-2.0

import itertools

import numpy as np
import pytest

import jwdm

SMALL = {
    "epochs": 2,
    "decay_start": 1,
    "latent_dim": 2,
    "ae_hidden": [16],
    "disc_hidden": [16],
    "data.n": 128,
    "seed": 3,
}


def test_gen_data_is_seeded():
    x1, y1 = jwdm.gen_data({"kind": "ring", "n": 50, "seed": 4})
    x2, y2 = jwdm.gen_data({"kind": "ring", "n": 50, "seed": 4})
    assert x1.shape == (50, 2) and y1.shape == (50, 2)
    assert np.array_equal(x1, x2) and np.array_equal(y1, y2)


def test_exact_solvers_match_brute_force():
    rng = np.random.default_rng(0)
    cost = rng.uniform(size=(5, 5))
    brute = min(sum(cost[i, p[i]] for i in range(5)) / 5 for p in itertools.permutations(range(5)))
    value, cols = jwdm.hungarian(cost)
    assert value == pytest.approx(brute, abs=1e-12)
    assert sorted(cols) == list(range(5))

    a, b = rng.uniform(size=(5, 2)), rng.uniform(size=(5, 2))
    c = jwdm.cost_matrix(a, b)
    assert np.allclose(c, ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    value, plan = jwdm.exact_wasserstein(a, b)
    assert plan.sum() == pytest.approx(1.0)
    assert value == pytest.approx(jwdm.hungarian(c)[0], abs=1e-12)


def test_sinkhorn_approaches_exact_value():
    rng = np.random.default_rng(1)
    a, b = rng.uniform(size=(6, 2)), rng.uniform(size=(4, 2))
    wb = np.array([0.1, 0.2, 0.3, 0.4])
    exact, _ = jwdm.exact_wasserstein(a, b, weights_b=wb)
    errors = [abs(jwdm.sinkhorn(a, b, weights_b=wb, epsilon=e)[0] - exact) for e in (1.0, 0.1, 0.01)]
    assert errors[0] >= errors[1] >= errors[2]
    with pytest.raises(jwdm.ConvergenceError):
        jwdm.sinkhorn(a, b, weights_b=wb, epsilon=1e-3, max_iters=2)


def test_frechet_and_decomposition():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(400, 2))
    assert jwdm.gaussian_frechet(a, a) == pytest.approx(0.0, abs=1e-9)
    assert jwdm.gaussian_frechet(a, a + 1.0) == pytest.approx(2.0, abs=1e-9)
    r = jwdm.decomposition([[0.0], [1.0]], [[0.0], [1.0]], [0.5, 0.5], [[0.0], [1.0]], [[1.0], [0.0]], [0.5, 0.5])
    assert r["gap"] >= -1e-9
    assert r["joint"] == pytest.approx(r["first"] + r["second"] + r["gap"])


def test_train_resume_and_synthesis(tmp_path):
    full = jwdm.train(SMALL)
    part = jwdm.train(SMALL, until_epoch=1)
    assert part.epoch == 1
    path = tmp_path / "ckpt.bin"
    part.save(path)
    resumed = jwdm.resume(jwdm.Model.load(path), 1)
    assert resumed.epoch == full.epoch == 2
    pts = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert np.array_equal(resumed.translate(pts), full.translate(pts))

    report = full.evaluate(eval_n=200)
    assert set(report) >= {"frechet_x", "frechet_y", "cycle_l1_x", "cycle_l1_y"}
    assert report["frechet_x"] >= 0.0

    traj = full.interpolate([1.0, 0.0], [0.0, 1.0], n=4)
    assert traj["source"].shape == (5, 2)
    assert traj["rho"] == [1.0, 0.75, 0.5, 0.25, 0.0]
    same = full.interpolate([0.3, 0.3], [0.3, 0.3], n=3)
    assert np.all(same["target"] == same["target"][0])


def test_cli_in_process(tmp_path):
    code, out, _ = jwdm.run_cli(["verify-theorem", "--instances", "20", "--products", "5", "--out", str(tmp_path)])
    assert code == 0 and "PASS" in out
    code, _, err = jwdm.run_cli(["train", "--epochs", "-1", "--out", str(tmp_path / "bad")])
    assert code == 2 and err
