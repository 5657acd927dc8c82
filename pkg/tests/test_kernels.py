"""The compiled and pure-Python kernels must agree bit for bit."""

import numpy as np
import pytest

from rostexplore import _fallback, kernels
from rostexplore.explorer import explore
from rostexplore.generative import GenConfig, sample_world
from rostexplore.grid import neighborhood_table
from rostexplore.topic_model import Hyperparams

compiled = pytest.importorskip("rostexplore._kernels")


def random_state(seed, W=5, H=4, K=3, V=7, delta=1):
    rng = np.random.default_rng(seed)
    n_obs = 12
    sizes = rng.integers(0, 6, n_obs)
    obs_start = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    obs_cell = rng.integers(0, W * H, n_obs).astype(np.int64)
    tokens = rng.integers(0, V, obs_start[-1]).astype(np.int32)
    z = rng.integers(-1, K, obs_start[-1]).astype(np.int32)
    nwk = np.zeros((K, V), np.int64)
    hist = np.zeros((W * H, K), np.int64)
    for o in range(n_obs):
        for i in range(obs_start[o], obs_start[o + 1]):
            if z[i] >= 0:
                nwk[z[i], tokens[i]] += 1
                hist[obs_cell[o], z[i]] += 1
    ptr, idx = neighborhood_table(W, H, delta)
    obs_ids = rng.integers(0, n_obs, 30).astype(np.int64)
    u = rng.random(int((obs_start[obs_ids + 1] - obs_start[obs_ids]).sum()))
    return dict(obs_ids=obs_ids, obs_start=obs_start, obs_cell=obs_cell, tokens=tokens, z=z,
                nwk=nwk, nk=nwk.sum(1), hist=hist, nbr_ptr=ptr, nbr_idx=idx, u=u)


def _run(fn, st, update):
    st = {k: v.copy() for k, v in st.items()}
    used = fn(st["obs_ids"], st["obs_start"], st["obs_cell"], st["tokens"], st["z"], st["nwk"],
              st["nk"], st["hist"], st["nbr_ptr"], st["nbr_idx"], 0.3, 0.05, st["u"], update)
    return used, st


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("update", [True, False])
def test_gibbs_obs_equivalent(seed, update):
    st = random_state(seed)
    n1, a = _run(compiled.gibbs_obs, st, update)
    n2, b = _run(_fallback.gibbs_obs, st, update)
    assert n1 == n2 == st["u"].size
    for key in ("z", "nwk", "nk", "hist"):
        np.testing.assert_array_equal(a[key], b[key])


@pytest.mark.parametrize("seed", range(10))
def test_polya_cells_equivalent(seed):
    rng = np.random.default_rng(seed)
    W, H, K, per = 6, 5, 4, 3
    ptr, idx = neighborhood_table(W, H, 2)
    order = rng.permutation(W * H).astype(np.int64)
    u = rng.random(W * H * per)
    out = []
    for fn in (compiled.polya_cells, _fallback.polya_cells):
        hist = np.zeros((W * H, K), np.int64)
        labels = np.zeros(W * H * per, np.int32)
        fn(order, per, hist, labels, ptr, idx, 0.1, u)
        out.append((hist, labels))
    np.testing.assert_array_equal(out[0][0], out[1][0])
    np.testing.assert_array_equal(out[0][1], out[1][1])


def test_end_to_end_runs_identical_across_backends():
    previous = kernels.BACKEND
    results = {}
    try:
        for name in ("compiled", "python"):
            kernels.use(name)
            sw = sample_world(GenConfig(8, 8, 3, 30, 0.1, 0.1, 1, 5, seed=4))
            hyper = Hyperparams(K=3, V=30, alpha=0.1, beta=0.1, delta=1)
            path, model = explore(sw.world, "topic", 15, hyper, refine_budget=20, seed=9)
            results[name] = (sw.world.cells, path.cells, model.assignments.copy(), model.nwk.copy())
    finally:
        kernels.use(previous)
    a, b = results["compiled"], results["python"]
    assert all(np.array_equal(x, y) for x, y in zip(a[0], b[0]))
    assert a[1] == b[1]
    np.testing.assert_array_equal(a[2], b[2])
    np.testing.assert_array_equal(a[3], b[3])


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use("fortran")
