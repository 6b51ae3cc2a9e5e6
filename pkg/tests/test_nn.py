import numpy as np
import pytest

from dpgraphgen.nn import (
    add_scaled,
    clone_params,
    fnn2_backward,
    fnn2_forward,
    gcn2_backward,
    gcn2_forward,
    global_norm,
    glorot_init,
    grad_check,
    params_from_jsonable,
    params_to_jsonable,
    relu,
    scale_params,
    sigmoid,
    zeros_like_params,
)
from oracles import fd_grad_array, rel_err


def test_relu_and_sigmoid_basics():
    x = np.array([-2.0, 0.0, 3.0])
    assert np.array_equal(relu(x), [0.0, 0.0, 3.0])
    s = sigmoid(np.array([0.0, 800.0, -800.0]))
    assert s[0] == pytest.approx(0.5)
    assert s[1] == 1.0  # saturates without overflow warnings
    assert s[2] == 0.0


def test_glorot_bounds_and_determinism():
    a = glorot_init(np.random.default_rng(5), 30, 20)
    b = glorot_init(np.random.default_rng(5), 30, 20)
    assert np.array_equal(a, b)
    limit = np.sqrt(6.0 / 50.0)
    assert np.abs(a).max() <= limit


def _setup_gcn(rng, n=6, d_in=6, hid=5, d_out=4):
    a = rng.random((n, n))
    a_hat = (a + a.T) / 2.0
    x = np.eye(n)[:, :d_in].copy()
    w0 = glorot_init(rng, d_in, hid)
    w1 = glorot_init(rng, hid, d_out)
    return a_hat, x, w0, w1


def test_gcn2_forward_matches_straight_line_recompute():
    rng = np.random.default_rng(1)
    a_hat, x, w0, w1 = _setup_gcn(rng)
    out, _ = gcn2_forward(a_hat, x, w0, w1)
    want = a_hat @ np.maximum(a_hat @ x @ w0, 0.0) @ w1
    assert np.allclose(out, want, atol=1e-12)


def test_gcn2_backward_matches_fd():
    rng = np.random.default_rng(2)
    a_hat, x, w0, w1 = _setup_gcn(rng)
    d_out = rng.standard_normal((6, 4))

    def loss(w0_, w1_, x_):
        out, _ = gcn2_forward(a_hat, x_, w0_, w1_)
        return float((out * d_out).sum())

    out, cache = gcn2_forward(a_hat, x, w0, w1)
    d_w0, d_w1, d_x = gcn2_backward(cache, d_out)
    assert rel_err(d_w0, fd_grad_array(lambda m: loss(m, w1, x), w0.copy())) < 1e-6
    assert rel_err(d_w1, fd_grad_array(lambda m: loss(w0, m, x), w1.copy())) < 1e-6
    assert rel_err(d_x, fd_grad_array(lambda m: loss(w0, w1, m), x.copy())) < 1e-6


def test_fnn2_backward_matches_fd():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((7, 4))
    w0 = glorot_init(rng, 4, 6)
    w1 = glorot_init(rng, 6, 3)
    d_out = rng.standard_normal((7, 3))

    def loss(w0_, w1_, x_):
        out, _ = fnn2_forward(x_, w0_, w1_)
        return float((out * d_out).sum())

    out, cache = fnn2_forward(x, w0, w1)
    d_w0, d_w1, d_x = fnn2_backward(cache, d_out)
    assert rel_err(d_w0, fd_grad_array(lambda m: loss(m, w1, x), w0.copy())) < 1e-6
    assert rel_err(d_w1, fd_grad_array(lambda m: loss(w0, m, x), w1.copy())) < 1e-6
    assert rel_err(d_x, fd_grad_array(lambda m: loss(w0, w1, m), x.copy())) < 1e-6


def test_shape_validation_raises():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        gcn2_forward(np.zeros((3, 4)), np.eye(4), np.eye(4), np.eye(4))
    with pytest.raises(ValueError):
        fnn2_forward(rng.random((3, 4)), rng.random((5, 2)), rng.random((2, 2)))


def test_param_set_helpers():
    rng = np.random.default_rng(4)
    params = {"a": rng.random((2, 3)), "b": rng.random((3, 1))}
    zeros = zeros_like_params(params)
    assert all(np.all(v == 0) and v.shape == params[k].shape for k, v in zeros.items())

    copy = clone_params(params)
    copy["a"][0, 0] += 1.0
    assert params["a"][0, 0] != copy["a"][0, 0]

    shifted = add_scaled(params, params, -1.0)
    assert all(np.allclose(v, 0.0) for v in shifted.values())

    doubled = scale_params(params, 2.0)
    assert np.allclose(doubled["a"], 2.0 * params["a"])

    norm = global_norm(params)
    want = np.sqrt(sum(float((v * v).sum()) for v in params.values()))
    assert norm == pytest.approx(want)


def test_params_json_round_trip():
    rng = np.random.default_rng(6)
    params = {"w": rng.standard_normal((3, 2)), "v": rng.standard_normal((1, 4))}
    blob = params_to_jsonable(params)
    back = params_from_jsonable(blob)
    assert set(back) == {"w", "v"}
    for k in params:
        assert np.array_equal(back[k], params[k])  # exact, not approximate


def test_params_from_jsonable_rejects_bad_shapes():
    blob = params_to_jsonable({"w": np.ones((2, 2))})
    blob["matrices"]["w"]["data"] = [1.0, 2.0, 3.0]  # wrong length
    with pytest.raises(ValueError):
        params_from_jsonable(blob)
    with pytest.raises(ValueError):
        params_from_jsonable({"format": "something-else"})


def test_grad_check_flags_wrong_gradient():
    rng = np.random.default_rng(8)
    params = {"w": rng.standard_normal((2, 2))}

    def good(ps):
        return float((ps["w"] ** 2).sum()), {"w": 2.0 * ps["w"]}

    def bad(ps):
        return float((ps["w"] ** 2).sum()), {"w": 3.0 * ps["w"]}

    assert grad_check(good, params) < 1e-8
    assert grad_check(bad, params) > 1e-2
