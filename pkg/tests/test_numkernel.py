import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import genemut.numkernel as nk
from genemut.numkernel import _pykernels
from genemut.numkernel.tensor import _result


def T(x, grad=False, name=None):
    return nk.Tensor(np.asarray(x, dtype=float), requires_grad=grad, name=name)


# ---- matmul ---------------------------------------------------------------

def test_matmul_identity():
    M = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(nk.matmul(T(np.eye(2)), T(M)).data, M)


def test_matmul_hand_arithmetic():
    out = nk.matmul(T([[1, 2], [3, 4]]), T([[5], [6]]))
    assert out.data.tolist() == [[17.0], [39.0]]


def test_matmul_mismatch_names_shapes():
    with pytest.raises(nk.DimensionError, match=r"\(2, 3\).*\(4, 2\)"):
        nk.matmul(T(np.zeros((2, 3))), T(np.zeros((4, 2))))


# ---- softmax ----------------------------------------------------------------

def test_softmax_uniform_row():
    np.testing.assert_allclose(nk.softmax_rows(T([[0, 0, 0]])).data, [[1 / 3] * 3], rtol=0, atol=1e-15)


def test_softmax_large_logits_no_overflow():
    out = nk.softmax_rows(T([[1000.0, 0.0]])).data
    assert np.isfinite(out).all()
    assert out[0, 0] == pytest.approx(1.0) and out[0, 1] < 1e-300


def test_softmax_matches_high_precision():
    mpmath.mp.dps = 40
    e1, e2 = mpmath.e ** 1, mpmath.e ** 2
    expected = [float(e1 / (e1 + e2)), float(e2 / (e1 + e2))]
    assert expected[0] == pytest.approx(0.26894142136999512, abs=1e-16)
    np.testing.assert_allclose(nk.softmax_rows(T([[1, 2]])).data[0], expected, rtol=0, atol=1e-15)


def test_softmax_masked_entries_get_zero_weight():
    out = nk.softmax_rows(T([[0.0, -np.inf, 0.0]])).data
    assert out.tolist() == [[0.5, 0.0, 0.5]]


def test_softmax_all_masked_row_is_degenerate():
    with pytest.raises(nk.DegenerateRowError, match="row 1"):
        nk.softmax_rows(T([[0.0, 1.0], [-np.inf, -np.inf]]))


finite_rows = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 8)),
                     elements=st.floats(-50, 50, allow_nan=False))


@settings(max_examples=200, deadline=None)
@given(finite_rows, st.floats(-1e3, 1e3, allow_nan=False))
def test_softmax_rows_sum_to_one_and_shift_invariant(x, shift):
    y = nk.softmax_rows(T(x)).data
    assert (y >= 0).all()
    np.testing.assert_allclose(y.sum(axis=1), 1.0, rtol=0, atol=1e-12)
    y2 = nk.softmax_rows(T(x + shift)).data
    np.testing.assert_allclose(y2, y, rtol=0, atol=1e-12)
    unique_max = (x == x.max(axis=1, keepdims=True)).sum(axis=1) == 1
    assert (y2.argmax(axis=1) == y.argmax(axis=1))[unique_max].all()


# ---- layer norm -------------------------------------------------------------

def test_layer_norm_constant_row_is_zero():
    out = nk.layer_norm(T([[4.0, 4.0, 4.0]]), T(np.ones(3)), T(np.zeros(3)), 1e-5).data
    assert np.array_equal(out, np.zeros((1, 3)))


def test_layer_norm_closed_form():
    # mean 2, population std 1
    out = nk.layer_norm(T([[1.0, 3.0]]), T(np.ones(2)), T(np.zeros(2)), 1e-14).data
    np.testing.assert_allclose(out, [[-1.0, 1.0]], atol=1e-12)


def test_layer_norm_zero_gain_gives_bias():
    bias = np.array([0.5, -2.0, 3.0])
    out = nk.layer_norm(T(np.random.default_rng(0).normal(size=(4, 3))), T(np.zeros(3)), T(bias), 1e-5).data
    assert np.array_equal(out, np.tile(bias, (4, 1)))


# ---- backward ---------------------------------------------------------------

def test_backward_sum_gives_ones():
    W = T(np.random.default_rng(1).normal(size=(3, 4)), grad=True, name="W")
    grads = nk.backward(nk.sum(W))
    assert np.array_equal(grads["W"], np.ones((3, 4)))


def test_backward_square():
    x = T(3.0, grad=True, name="x")
    nk.backward(nk.mul(x, x))
    assert float(x.grad) == 6.0


def test_backward_rejects_non_scalar_seed():
    x = T([1.0, 2.0], grad=True)
    with pytest.raises(nk.ContractError):
        nk.backward(nk.scale(x, 2.0))


def test_backward_consumes_tape():
    x = T([[1.0, 2.0]], grad=True)
    y = nk.scale(x, 2.0)
    loss = nk.sum(y)
    nk.backward(loss)
    assert y._backward is None and loss._parents == ()


def test_shared_node_accumulates():
    x = T(2.0, grad=True, name="x")
    y = nk.mul(x, x)
    nk.backward(nk.add(y, y))  # 2x^2 -> 4x
    assert float(x.grad) == 8.0


def test_two_layer_composition_matches_finite_differences():
    rng = np.random.default_rng(3)
    ps = nk.ParameterSet([("w1", rng.normal(size=(3, 5))), ("b1", rng.normal(size=5)),
                          ("w2", rng.normal(size=(5, 2)))])
    X = T(rng.normal(size=(4, 3)))

    def f():
        h = nk.gelu(nk.add(nk.matmul(X, ps["w1"]), ps["b1"]))
        return nk.sum(nk.softplus(nk.matmul(h, ps["w2"])))

    report = nk.finite_diff_check(f, ps, h=1e-4, tol=1e-6)
    assert report.passed, report.summary()


# ---- finite-difference checker ------------------------------------------------

def test_gradcheck_quadratic_form():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4))
    A = A @ A.T
    ps = nk.ParameterSet([("x", rng.normal(size=(4, 1)))])

    def f():
        x = ps["x"]
        return nk.sum(nk.matmul(nk.transpose(x), nk.matmul(T(A), x)))

    report = nk.finite_diff_check(f, ps, h=1e-4, tol=1e-8)
    assert report.passed, report.summary()
    # exact gradient is 2 A x
    np.testing.assert_allclose([e.analytic for e in report.entries], (2 * A @ ps["x"].data).ravel(), rtol=1e-12)


def _bad_square(a):
    # adjoint deliberately off by a factor 1.5
    return _result(a.data ** 2, (a,), lambda g: (3.0 * a.data * g,), "bad_square")


def test_gradcheck_flags_corrupted_adjoint():
    ps = nk.ParameterSet([("good", np.array([0.3, -0.2])), ("broken", np.array([0.7, 1.1]))])

    def f():
        return nk.add(nk.sum(nk.mul(ps["good"], ps["good"])), nk.sum(_bad_square(ps["broken"])))

    report = nk.finite_diff_check(f, ps)
    assert not report.passed
    assert report.failures() == ["broken"]
    assert report.worst.param == "broken"


def test_gradcheck_detects_nondeterminism():
    ps = nk.ParameterSet([("x", np.array([1.0]))])
    calls = iter(range(1000))

    def f():
        return nk.add(nk.sum(ps["x"]), float(next(calls)))

    with pytest.raises(nk.OracleInvalidError):
        nk.finite_diff_check(f, ps)


def test_gradcheck_rejects_large_step():
    ps = nk.ParameterSet([("x", np.array([1.0]))])
    with pytest.raises(ValueError):
        nk.finite_diff_check(lambda: nk.sum(ps["x"]), ps, h=0.1)


def _composite(rng, r, c):
    ps = nk.ParameterSet([
        ("a", rng.normal(size=(r, c))), ("b", rng.normal(size=(c, c))), ("bias", rng.normal(size=c)),
        ("g", rng.normal(size=c)), ("beta", rng.normal(size=c)), ("v", rng.normal(size=r)),
    ])
    X = T(rng.normal(size=(r, c)))

    def f():
        h = nk.add(nk.matmul(ps["a"], ps["b"]), ps["bias"])
        att = nk.softmax_rows(nk.scale(nk.matmul(h, nk.transpose(X)), 0.5))
        z = nk.layer_norm(nk.add(nk.matmul(att, X), nk.gelu(h)), ps["g"], ps["beta"], 1e-5)
        y = nk.sum_rows(nk.mul(z, ps["a"]))
        idx = np.arange(r)
        return nk.softplus(nk.add(nk.logsumexp(nk.take(y, idx[::2])),
                                  nk.scale(nk.logsumexp(nk.scale(nk.add(y, ps["v"]), -1.0)), 0.7)))

    return f, ps


@pytest.mark.parametrize("seed", range(20))
def test_composite_ops_gradient_soundness(seed):
    rng = np.random.default_rng(seed)
    r, c = (int(x) for x in rng.integers(2, 9, size=2))
    f, ps = _composite(rng, r, c)
    report = nk.finite_diff_check(f, ps, h=1e-4, tol=1e-4)
    assert report.passed, report.summary()


# ---- Adam -------------------------------------------------------------------

def test_adam_zero_grads_no_l2_leaves_params():
    ps = nk.ParameterSet([("w", np.array([[1.0, -2.0]]))])
    state = nk.AdamState(ps.size, l2_weight=0.0)
    nk.adam_step(state, ps, {"w": np.zeros((1, 2))})
    assert ps["w"].data.tolist() == [[1.0, -2.0]]
    assert state.step == 1


def test_adam_first_step_closed_form():
    ps = nk.ParameterSet([("x", np.array([0.0]))])
    state = nk.AdamState(ps.size, lr=1e-4, l2_weight=0.0)
    nk.adam_step(state, ps, {"x": np.array([1.0])})
    # m_hat = v_hat = 1 after bias correction
    assert ps["x"].data[0] == pytest.approx(-1e-4 / (1 + 1e-8), rel=1e-12)


def test_adam_nan_gradient_poisons_nothing():
    ps = nk.ParameterSet([("a", np.array([1.0, 2.0])), ("b", np.array([3.0]))])
    state = nk.AdamState(ps.size)
    before = ps.flat.copy()
    with pytest.raises(nk.PoisonedStepError, match="'b'"):
        nk.adam_step(state, ps, {"a": np.array([0.1, 0.1]), "b": np.array([np.nan])})
    assert np.array_equal(ps.flat, before)
    assert state.step == 0 and not state.m.any()


def test_adam_decoupled_weight_decay():
    ps = nk.ParameterSet([("x", np.array([2.0]))])
    state = nk.AdamState(ps.size, lr=0.1, l2_weight=0.5)
    nk.adam_step(state, ps, {"x": np.array([0.0])})
    assert ps["x"].data[0] == pytest.approx(2.0 - 0.1 * 0.5 * 2.0)


def test_adam_matches_textbook_loop():
    rng = np.random.default_rng(5)
    p0 = rng.normal(size=7)
    ps = nk.ParameterSet([("p", p0.copy())])
    state = nk.AdamState(ps.size, lr=1e-2, l2_weight=1e-3)
    p, m, v = p0.copy(), np.zeros(7), np.zeros(7)
    for t in range(1, 6):
        g = rng.normal(size=7)
        nk.adam_step(state, ps, {"p": g})
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        p = p - 1e-2 * ((m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8) + 1e-3 * p)
    np.testing.assert_allclose(ps["p"].data, p, rtol=1e-13, atol=1e-15)


# ---- Xavier -----------------------------------------------------------------

def test_xavier_deterministic():
    assert np.array_equal(nk.xavier_init((4, 4), 11), nk.xavier_init((4, 4), 11))
    assert not np.array_equal(nk.xavier_init((4, 4), 11), nk.xavier_init((4, 4), 12))


def test_xavier_bounds_over_many_draws():
    W = nk.xavier_init((100, 100), 0)
    b = math.sqrt(6 / 200)
    assert W.size == 10_000
    assert np.abs(W).max() <= b
    assert np.abs(W).max() > 0.99 * b  # actually fills the interval


def test_xavier_fan_sum():
    assert nk.xavier_bound((2, 6)) == math.sqrt(6 / 8)


def test_xavier_rejects_non_matrix():
    with pytest.raises(ValueError):
        nk.xavier_init((3,), 0)


# ---- serialization -------------------------------------------------------------

def test_tensor_roundtrip_bit_identical(tmp_path):
    a = np.random.default_rng(0).normal(size=(3, 5))
    nk.save_tensor(tmp_path / "a.ten", a)
    raw = (tmp_path / "a.ten").read_bytes()
    assert raw.startswith(b"TENSOR 3 5\n")
    assert len(raw) == len(b"TENSOR 3 5\n") + 8 * 15
    assert np.array_equal(nk.load_tensor(tmp_path / "a.ten"), a)


def test_tensor_truncated_raises():
    buf = io.BytesIO()
    nk.write_tensor(buf, np.ones((2, 2)))
    with pytest.raises(nk.TensorFormatError, match="truncated"):
        nk.read_tensor(io.BytesIO(buf.getvalue()[:-3]))


def test_checkpoint_roundtrip(tmp_path):
    named = {"kam.layer0.wq": np.eye(3), "dec.proj": np.arange(6.0).reshape(2, 3)}
    nk.save_checkpoint(tmp_path / "c.ckpt", named)
    back = nk.load_checkpoint(tmp_path / "c.ckpt")
    assert list(back) == list(named)
    for k in named:
        assert np.array_equal(back[k], named[k])


# ---- backends ---------------------------------------------------------------

def test_backends_agree():
    from genemut.numkernel import _backend

    if _backend.BACKEND != "cython":
        pytest.skip("compiled kernels not built")
    from genemut.numkernel import _ckernels as ck

    rng = np.random.default_rng(9)
    for _ in range(20):
        x = rng.normal(scale=3, size=(int(rng.integers(1, 9)), int(rng.integers(1, 9))))
        y1, y2 = ck.softmax_rows(x), _pykernels.softmax_rows(x)
        np.testing.assert_allclose(y1, y2, rtol=0, atol=1e-14)
        gy = rng.normal(size=x.shape)
        np.testing.assert_allclose(ck.softmax_rows_backward(y1, gy), _pykernels.softmax_rows_backward(y1, gy),
                                   atol=1e-14)
        g, b = rng.normal(size=x.shape[1]), rng.normal(size=x.shape[1])
        o1, h1, r1 = ck.layer_norm_forward(x, g, b, 1e-5)
        o2, h2, r2 = _pykernels.layer_norm_forward(x, g, b, 1e-5)
        np.testing.assert_allclose(o1, o2, atol=1e-12)
        for u, v in zip(ck.layer_norm_backward(gy, h1, r1, g), _pykernels.layer_norm_backward(gy, h2, r2, g)):
            np.testing.assert_allclose(u, v, atol=1e-12)
    n = 50
    bufs = [rng.normal(size=n) for _ in range(2)] + [np.zeros(n), np.zeros(n)]
    copies = [b.copy() for b in bufs]
    ck.adam_update(bufs[0], bufs[1], bufs[2], bufs[3], 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001, 1e-5)
    _pykernels.adam_update(copies[0], copies[1], copies[2], copies[3], 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001, 1e-5)
    np.testing.assert_allclose(bufs[0], copies[0], rtol=0, atol=1e-15)


@pytest.mark.filterwarnings("ignore:overflow")
def test_non_finite_output_raises():
    with pytest.raises(nk.NumericalError):
        nk.scale(T([1e308]), 10.0)


def test_determinism_bit_identical():
    def run():
        f, ps = _composite(np.random.default_rng(4), 5, 6)
        loss = f()
        return loss.data.copy(), ps.flat_grad(nk.backward(loss))

    (l1, g1), (l2, g2) = run(), run()
    assert np.array_equal(l1, l2) and np.array_equal(g1, g2)
