import numpy as np
import pytest

from dapip import autodiff as ad
from dapip.errors import ShapeMismatchError


def fd_check(build, arrays, rtol=1e-4, atol=1e-7, h=1e-5):
    """Analytic vs central-difference gradients for the given leaf arrays."""
    leaves = [ad.Tensor(a, requires=True) for a in arrays]
    loss = build(*leaves)
    loss.backward()
    analytic = [l.grad.copy() if l.grad is not None else np.zeros_like(l.data)
                for l in leaves]

    def value():
        fresh = [ad.Tensor(a.data) for a in leaves]
        return float(build(*fresh).data)

    numeric = ad.finite_difference(value, [l.data for l in leaves], h=h)
    for a, n in zip(analytic, numeric):
        assert np.allclose(a, n, rtol=rtol, atol=atol), (a, n)


RNG = np.random.default_rng(0)


def test_add_mul_broadcast():
    fd_check(lambda a, b: ad.tsum(ad.mul(ad.add(a, b), a)),
             [RNG.normal(size=(3, 4)), RNG.normal(size=(4,))])


def test_matmul_2d():
    fd_check(lambda a, b: ad.tsum(ad.tanh(a @ b)),
             [RNG.normal(size=(3, 4)), RNG.normal(size=(4, 2))])


def test_matmul_vector():
    fd_check(lambda a, b: ad.tsum(a @ b),
             [RNG.normal(size=(4,)), RNG.normal(size=(4, 2))])


def test_matmul_batched():
    fd_check(lambda a, b: ad.tsum(ad.sigmoid(a @ b)),
             [RNG.normal(size=(2, 3, 4)), RNG.normal(size=(4, 2))])


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        ad.matmul(ad.Tensor(np.zeros((2, 3))), ad.Tensor(np.zeros((4, 2))))


def test_linear_map_gradient_is_input():
    W = ad.Tensor(RNG.normal(size=(3, 2)), requires=True)
    x = np.array([1.0, 2.0, 3.0])
    loss = ad.tsum(ad.Tensor(x) @ W)
    loss.backward()
    assert np.allclose(W.grad, np.stack([x, x], axis=1))


def test_activations():
    fd_check(lambda a: ad.tsum(ad.tanh(a)), [RNG.normal(size=(5,))])
    fd_check(lambda a: ad.tsum(ad.sigmoid(a)), [RNG.normal(size=(5,))])
    fd_check(lambda a: ad.tsum(ad.exp(a)), [RNG.normal(size=(5,))])
    fd_check(lambda a: ad.tsum(ad.log(ad.exp(a) + 1.5)), [RNG.normal(size=(5,))])


def test_sum_axes_and_mean():
    fd_check(lambda a: ad.tsum(ad.mul(ad.tsum(a, axis=0), 2.0)),
             [RNG.normal(size=(3, 4))])
    fd_check(lambda a: ad.tsum(ad.tmean(a, axis=1)), [RNG.normal(size=(3, 4))])


def test_concat_stack_slice_reshape():
    def build(a, b):
        c = ad.concat([a, b], axis=1)
        s = ad.stack([c, c], axis=0)
        return ad.tsum(ad.tanh(ad.reshape(s[0, :, 1:3], (6,))))

    fd_check(build, [RNG.normal(size=(3, 2)), RNG.normal(size=(3, 3))])


def test_getitem_int_array():
    def build(a):
        idx = np.array([0, 2, 2])
        return ad.tsum(a[idx])

    fd_check(build, [RNG.normal(size=(4, 3))])


def test_logsumexp_matches_naive():
    x = RNG.normal(size=(6,)) * 10
    got = ad.logsumexp(ad.Tensor(x)).data
    assert np.allclose(got, np.log(np.exp(x).sum()))
    fd_check(lambda a: ad.logsumexp(a), [RNG.normal(size=(6,))])
    fd_check(lambda a: ad.tsum(ad.logsumexp(a, axis=1)), [RNG.normal(size=(3, 5))])


def test_logsumexp_stable_at_large_scores():
    x = ad.Tensor(np.array([1000.0, 1000.0]))
    assert np.isfinite(ad.logsumexp(x).data)


def test_softmax_normalizes_and_shift_invariant():
    z = ad.Tensor(RNG.normal(size=(7,)))
    p = ad.softmax(z, axis=0)
    assert abs(p.data.sum() - 1.0) < 1e-12
    p2 = ad.softmax(z + 5.0, axis=0)
    assert np.allclose(p.data, p2.data)


def test_softmax_cross_entropy_gradient_zero_at_optimum():
    # probability mass already fully on the target class
    logits = ad.Tensor(np.array([50.0, 0.0, 0.0]), requires=True)
    loss = ad.mul(ad.logsumexp(logits) - logits[0], 1.0)
    loss.backward()
    assert np.all(np.abs(logits.grad) <= 1e-8)


def test_embedding_gather_and_scatter():
    def build(table):
        ids = np.array([[0, 1], [1, 2]])
        return ad.tsum(ad.tanh(ad.embedding(table, ids)))

    fd_check(build, [RNG.normal(size=(4, 3))])


def test_dot():
    fd_check(lambda a, b: ad.dot(a, b),
             [RNG.normal(size=(5,)), RNG.normal(size=(5,))])


def test_no_grad_skips_graph():
    t = ad.Tensor(np.ones(3), requires=True)
    with ad.no_grad():
        out = ad.tanh(t)
    assert out._bwd is None and not out.requires


def test_reused_node_accumulates():
    a = ad.Tensor(np.array([2.0]), requires=True)
    b = ad.add(ad.mul(a, a), ad.mul(a, 3.0))  # a^2 + 3a
    b.backward()
    assert np.allclose(a.grad, [7.0])


def test_backward_requires_scalar():
    with pytest.raises(ShapeMismatchError):
        ad.Tensor(np.zeros(3), requires=True).backward()


def test_check_finite():
    with pytest.raises(FloatingPointError):
        ad.check_finite(np.array([1.0, np.inf]))
