import math

import numpy as np
import pytest

from sextic_pinn.loss import (
    CombineMode,
    LossBreakdown,
    boundary_loss,
    collocation_grid,
    combine,
    interior_loss,
    loss_and_gradient,
    loss_gradient,
    total_loss,
)
from sextic_pinn.network import NetworkConfig, init
from sextic_pinn.problem import builtin, exact_derivative_stack
from sextic_pinn.report import fd_check_gradient, fd_gradient

E = math.e


@pytest.fixture
def zero_net():
    p = init(NetworkConfig())
    return p.with_flat(np.zeros(p.size))


def test_collocation_grid():
    np.testing.assert_allclose(collocation_grid(0, 1, 11), np.arange(11) / 10, atol=1e-15)
    assert collocation_grid(0, 1, 2).tolist() == [0.0, 1.0]
    assert collocation_grid(0, 1, 21)[10] == 0.5
    with pytest.raises(ValueError):
        collocation_grid(0, 1, 1)


def test_interior_loss_zero_network(zero_net):
    want = (6 * math.exp(0.5)) ** 2
    assert interior_loss(zero_net, builtin("example1"), [0.5]) == pytest.approx(want, rel=1e-14)
    assert interior_loss(zero_net, builtin("example1"), [0.5]) == pytest.approx(97.858146, abs=1e-6)
    with pytest.raises(ValueError):
        interior_loss(zero_net, builtin("example1"), [])


def test_boundary_loss_zero_network(zero_net):
    # example1 targets: y(0)=1, y''(0)=-1, y''''(0)=-3, y(1)=0, y''(1)=-2e, y''''(1)=-4e
    assert boundary_loss(zero_net, builtin("example1")) == pytest.approx(11 + 20 * E**2, rel=1e-14)
    assert boundary_loss(zero_net, builtin("example2")) == pytest.approx(3 + 3 * E**2, rel=1e-14)
    assert boundary_loss(zero_net, builtin("example2")) == pytest.approx(25.16717, abs=5e-6)


def test_combine_modes():
    assert combine(0.0, 0.0, "sum") == 0 and combine(0.0, 0.0, "sum_of_squares") == 0
    assert combine(2.0, 3.0, CombineMode.SUM) == 5
    assert combine(2.0, 3.0, CombineMode.SUM_OF_SQUARES) == 13


@pytest.mark.parametrize("mode", list(CombineMode))
def test_total_loss_breakdown(mode):
    p = init(NetworkConfig(seed=2))
    xs = collocation_grid(0, 1, 21)
    bd = total_loss(p, builtin("example2"), xs, mode)
    assert isinstance(bd, LossBreakdown) and bd.mode is mode
    assert bd.interior >= 0 and bd.boundary >= 0
    if mode is CombineMode.SUM:
        assert bd.total == bd.interior + bd.boundary
    else:
        assert bd.total == bd.interior**2 + bd.boundary**2


def test_interior_loss_permutation_invariant():
    p = init(NetworkConfig(seed=4))
    xs = np.random.default_rng(3).uniform(0, 1, 33)
    base = interior_loss(p, builtin("example2"), xs)
    rng = np.random.default_rng(9)
    for _ in range(5):
        assert interior_loss(p, builtin("example2"), rng.permutation(xs)) == base


def test_zero_network_output_bias_gradient(zero_net):
    # boundary part: y(1) residual is 0, y(0) residual is -1, higher orders don't see c;
    # interior part: (2/N) sum_i R_i * (-1)
    prob = builtin("example1")
    xs = collocation_grid(0, 1, 21)
    g = loss_gradient(zero_net, prob, xs)
    interior = -(2 / xs.size) * np.sum(6 * np.exp(xs))
    boundary = 2 * (0.0 - 1.0) * 1.0
    assert g[-1] == pytest.approx(interior + boundary, rel=1e-13)


def test_gradient_matches_two_point_central_differences():
    # seeded random network, example1, 21-point grid, Sum, step 1e-6*max(1,|p|)
    p = init(NetworkConfig(seed=42))
    xs = collocation_grid(0, 1, 21)
    prob = builtin("example1")
    g = loss_gradient(p, prob, xs)
    fd = fd_gradient(p, prob, xs, "sum", rel_step=1e-6)
    rel = np.abs(g - fd) / np.maximum(np.abs(fd), 1e-3)
    assert rel.max() <= 1e-5


@pytest.mark.parametrize("name", ["example1", "example2"])
@pytest.mark.parametrize("mode", list(CombineMode))
def test_gradient_finite_difference_both_modes(name, mode):
    p = init(NetworkConfig(seed=7))
    p = p.with_flat(p.flatten() + np.random.default_rng(7).normal(0, 0.3, p.size))
    xs = collocation_grid(0, 1, 21)
    assert fd_check_gradient(p, builtin(name), xs, mode, rel_step=1e-4, stencil=4) <= 1e-5


def test_gradient_jet_path_matches_closed_form():
    p = init(NetworkConfig(seed=3))
    xs = collocation_grid(0, 1, 21)
    prob = builtin("example2")
    bd1, g1 = loss_and_gradient(p, prob, xs, method="jet")
    bd2, g2 = loss_and_gradient(p, prob, xs, method="closed_form")
    np.testing.assert_allclose(g1, g2, rtol=1e-10, atol=1e-10)
    assert bd1.total == pytest.approx(bd2.total, rel=1e-13)
    assert bd1.total == pytest.approx(total_loss(p, prob, xs).total, rel=1e-13)


def test_deep_network_gradient():
    p = init(NetworkConfig(hidden_sizes=(5, 4), seed=1))
    xs = collocation_grid(0, 1, 9)
    assert fd_check_gradient(p, builtin("example2"), xs, "sum", rel_step=1e-4, stencil=4) <= 1e-5


@pytest.mark.parametrize("name", ["example1", "example2"])
def test_loss_bounded_near_exact_solution(name, monkeypatch):
    """A stub network reproducing the exact stack to within eps gives loss <= C eps^2."""
    import sextic_pinn.loss as loss_mod

    prob = builtin(name)
    eps = 1e-6
    xs = collocation_grid(0, 1, 21)
    for seed in range(10):
        rng = np.random.default_rng(seed)
        noise = {float(x): rng.uniform(-eps, eps, 7) for x in xs}

        def stub(params, x, order=6):
            x = np.asarray(x, dtype=float).reshape(-1)
            return exact_derivative_stack(prob, x) + np.array([noise[float(v)] for v in x])

        monkeypatch.setattr(loss_mod, "derivatives", stub)
        # per-point residual Lipschitz bound: ex1 |dR| <= 2 eps,
        # ex2 |dR| <= eps + e^-x (2 |y| eps + eps^2) = 3 eps + eps^2 since y = e^x
        per_point = 2 * eps if name == "example1" else 3 * eps + eps**2
        bound_int = per_point**2
        bound_bc = 6 * eps**2
        bd = total_loss(None, prob, xs)
        assert bd.interior <= bound_int
        assert bd.boundary <= bound_bc
        assert bd.total <= bound_int + bound_bc
