import math

import numpy as np
import pytest

from cesim.errors import ConfigurationError, GenerationError
from cesim.numerics import finite_diff_gradient
from cesim.objectives import (
    NoiseModel,
    ObjectiveKind,
    ProblemInstance,
    eval_objective,
    generate_instance,
    grad_objective,
    stochastic_gradient,
)
from cesim.streams import RandomStream


def _one_dim_instance(kind, a=1.0, b=0.0):
    A = np.array([[a]])
    return ProblemInstance(
        kind=kind, agents=[(A, np.array([b]))], planted_optimum=np.array([b / a]), d=1, l=1
    )


def test_eval_zero_at_planted_optimum(small_instance):
    for i in range(small_instance.n_agents):
        assert eval_objective(small_instance, i, small_instance.planted_optimum) == 0.0


def test_eval_sigmoid_is_half_at_zero_residual(small_sigmoid_instance):
    inst = small_sigmoid_instance
    assert eval_objective(inst, 0, inst.planted_optimum) == pytest.approx(0.5)


def test_eval_one_dim_worked_value():
    inst = _one_dim_instance(ObjectiveKind.REGRESSION_SIN)
    x = np.array([math.pi])
    # r = pi, sin(pi) = 0, so q = pi^2
    assert eval_objective(inst, 0, x) == pytest.approx(math.pi**2, rel=1e-12)


def test_grad_zero_at_planted_optimum(small_instance):
    g = grad_objective(small_instance, 0, small_instance.planted_optimum)
    assert np.array_equal(g, np.zeros(small_instance.d))


def test_grad_one_dim_worked_value():
    inst = _one_dim_instance(ObjectiveKind.REGRESSION_SIN)
    g = grad_objective(inst, 0, np.array([1.0]))
    assert g[0] == pytest.approx(2.0 + math.sin(2.0), rel=1e-12)


def test_grad_matches_finite_difference_both_kinds():
    stream = RandomStream(7)
    rng = np.random.default_rng(3)
    for kind in ObjectiveKind:
        inst = generate_instance(kind, 4, 4, 6, 0.8, stream)
        for _ in range(25):
            x = rng.standard_normal(4) * 2.0
            agent = int(rng.integers(4))
            fd = finite_diff_gradient(lambda z: eval_objective(inst, agent, z), x, 1e-6)
            g = grad_objective(inst, agent, x)
            assert np.linalg.norm(fd - g) <= max(1e-5 * np.linalg.norm(g), 1e-7)


def test_stochastic_gradient_sigma_zero_is_exact(small_instance, rng):
    x = rng.standard_normal(small_instance.d)
    gen = RandomStream(1).child("noise")
    g = stochastic_gradient(small_instance, 0, x, NoiseModel(0.0, 1), gen)
    assert np.array_equal(g, grad_objective(small_instance, 0, x))


def test_stochastic_gradient_deterministic_per_lineage(small_instance, rng):
    x = rng.standard_normal(small_instance.d)
    stream = RandomStream(9)
    nm = NoiseModel(0.5, 1)
    a = stochastic_gradient(small_instance, 1, x, nm, stream.child("g", 0))
    b = stochastic_gradient(small_instance, 1, x, nm, stream.child("g", 0))
    assert np.array_equal(a, b)


def test_stochastic_gradient_noise_moments(small_instance):
    """Mean equals the exact gradient; E||noise||^2 = sigma^2 / m."""
    inst = small_instance
    x = inst.planted_optimum  # exact gradient is zero there
    gen = RandomStream(77).child("mc")
    sigma, m = 1.0, 4
    nm = NoiseModel(sigma, m)
    draws = np.array(
        [stochastic_gradient(inst, 0, x, nm, gen) for _ in range(50_000)]
    )
    assert np.max(np.abs(draws.mean(axis=0))) < 0.01
    mean_sq_norm = float((draws**2).sum(axis=1).mean())
    assert abs(mean_sq_norm - sigma**2 / m) < 0.03 * sigma**2 / m


def test_generate_instance_plants_shared_minimizer(small_instance):
    """Every agent's b equals A @ x_star, so any subset shares the minimizer."""
    for A, b in small_instance.agents:
        assert np.allclose(A @ small_instance.planted_optimum, b, atol=1e-12)


def test_generated_subset_minimum_matches_planted():
    """Gradient descent on a 2-agent subset lands on the planted optimum."""
    inst = generate_instance(ObjectiveKind.REGRESSION_SIN, 6, 3, 5, 0.7, RandomStream(21))
    subset = [1, 4]
    x = np.full(3, 0.3)
    for _ in range(4000):
        g = sum(grad_objective(inst, i, x) for i in subset) / len(subset)
        x = x - 0.05 * g
    assert np.linalg.norm(x - inst.planted_optimum) < 1e-4


def test_generate_instance_is_reproducible():
    a = generate_instance(ObjectiveKind.REGRESSION_SIN, 3, 4, 5, 1.0, RandomStream(5))
    b = generate_instance(ObjectiveKind.REGRESSION_SIN, 3, 4, 5, 1.0, RandomStream(5))
    for (A1, b1), (A2, b2) in zip(a.agents, b.agents):
        assert np.array_equal(A1, A2) and np.array_equal(b1, b2)


def test_generate_instance_rank_failure():
    with pytest.raises(GenerationError):
        generate_instance(ObjectiveKind.REGRESSION_SIN, 2, 3, 4, 0.0, RandomStream(0))


def test_generate_instance_rejects_wide_data():
    with pytest.raises(ConfigurationError):
        generate_instance(ObjectiveKind.REGRESSION_SIN, 2, 5, 3, 1.0, RandomStream(0))


def test_instance_json_round_trip(small_instance, tmp_path):
    path = tmp_path / "inst.json"
    small_instance.save(path)
    loaded = ProblemInstance.load(path)
    assert loaded.kind == small_instance.kind
    assert np.array_equal(loaded.planted_optimum, small_instance.planted_optimum)
    for (A1, b1), (A2, b2) in zip(loaded.agents, small_instance.agents):
        assert np.array_equal(A1, A2) and np.array_equal(b1, b2)


def test_noise_model_validation():
    with pytest.raises(ConfigurationError):
        NoiseModel(-0.1, 1)
    with pytest.raises(ConfigurationError):
        NoiseModel(0.5, 0)


def test_noise_model_per_coordinate_std():
    nm = NoiseModel(sigma=2.0, minibatch_m=4)
    # d * std^2 must equal sigma^2 / m
    d = 25
    assert d * nm.per_coordinate_std(d) ** 2 == pytest.approx(4.0 / 4, rel=1e-12)
