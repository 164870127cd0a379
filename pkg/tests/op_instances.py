"""Seeded random gradient-check instances for every catalogued autodiff op.

Each factory returns ``(f, arrays)`` where ``f`` maps a list of leaf tensors
to a scalar tensor via the op under test followed by a fixed random
projection, so central differences apply directly.
"""

from __future__ import annotations

import numpy as np

from csasr import autodiff as ad


def _project(out, rng):
    r = ad.Tensor(rng.normal(size=out.shape))
    return ad.tsum(ad.mul(out, r))


def make_instance(op_name, rng):
    if op_name in ("add", "sub", "mul"):
        shapes = [((3, 4), (3, 4)), ((3, 4), (1, 4)), ((3, 4), ())][rng.integers(3)]
        arrays = [rng.normal(size=s) for s in shapes]
        fn = getattr(ad, op_name)
        return lambda xs: _project(fn(xs[0], xs[1]), np.random.default_rng(0)), arrays
    if op_name == "neg":
        return lambda xs: _project(ad.neg(xs[0]), np.random.default_rng(0)), [rng.normal(size=(3, 4))]
    if op_name == "smul":
        c = float(rng.normal())
        return lambda xs: _project(ad.smul(xs[0], c), np.random.default_rng(0)), [rng.normal(size=(3, 4))]
    if op_name == "sadd":
        c = float(rng.normal())
        return lambda xs: _project(ad.sadd(xs[0], c), np.random.default_rng(0)), [rng.normal(size=(3, 4))]
    if op_name == "matmul":
        return (
            lambda xs: _project(ad.matmul(xs[0], xs[1]), np.random.default_rng(0)),
            [rng.normal(size=(3, 4)), rng.normal(size=(4, 2))],
        )
    if op_name in ("sigmoid", "tanh", "exp"):
        fn = getattr(ad, op_name)
        return lambda xs: _project(fn(xs[0]), np.random.default_rng(0)), [rng.normal(size=(3, 4))]
    if op_name == "relu":
        # keep inputs away from the kink so central differences are valid
        x = rng.normal(size=(3, 4))
        x = np.where(np.abs(x) < 0.2, x + np.sign(x) * 0.3, x)
        return lambda xs: _project(ad.relu(xs[0]), np.random.default_rng(0)), [x]
    if op_name == "log":
        return (
            lambda xs: _project(ad.log(xs[0]), np.random.default_rng(0)),
            [rng.uniform(0.5, 2.0, size=(3, 4))],
        )
    if op_name == "log_softmax":
        return lambda xs: _project(ad.log_softmax(xs[0]), np.random.default_rng(0)), [rng.normal(size=(3, 5))]
    if op_name == "concat":
        axis = int(rng.integers(2))
        if axis == 0:
            shapes = [(2, 3), (1, 3), (2, 3)]
        else:
            shapes = [(2, 3), (2, 1), (2, 2)]
        arrays = [rng.normal(size=s) for s in shapes]
        return lambda xs: _project(ad.concat(xs, axis=axis), np.random.default_rng(0)), arrays
    if op_name == "rows":
        idx = rng.integers(0, 5, size=4)
        return lambda xs: _project(ad.rows(xs[0], idx), np.random.default_rng(0)), [rng.normal(size=(5, 3))]
    if op_name == "slice_cols":
        return lambda xs: _project(ad.slice_cols(xs[0], 1, 4), np.random.default_rng(0)), [rng.normal(size=(3, 6))]
    if op_name == "gather":
        idx = rng.integers(0, 5, size=4)
        return lambda xs: _project(ad.gather(xs[0], idx), np.random.default_rng(0)), [rng.normal(size=(4, 5))]
    if op_name == "sum":
        return lambda xs: ad.tsum(xs[0]), [rng.normal(size=(3, 4))]
    if op_name == "mean":
        return lambda xs: ad.tmean(xs[0]), [rng.normal(size=(3, 4))]
    if op_name == "transpose":
        return lambda xs: _project(ad.transpose(xs[0]), np.random.default_rng(0)), [rng.normal(size=(3, 4))]
    if op_name == "conv1d_same":
        return (
            lambda xs: _project(ad.conv1d_same(xs[0], xs[1]), np.random.default_rng(0)),
            [rng.normal(size=(1, 7)), rng.normal(size=(3, 3))],
        )
    raise KeyError(op_name)
