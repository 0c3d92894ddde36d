"""Closed-form and integrated quantities of the signaling model.

A worker's cover letter quality is h = q + rho*A + nu with productivity
q ~ N(mu0, tau2), tool access rho ~ Bernoulli(p), and shock
nu ~ N(0, sigma2). Employers observe only h, form a posterior over rho,
shrink the letter toward the prior accordingly, and choose among N
applicants (or an outside option) by multinomial logit on expected
productivity.

All functions accept scalars or arrays in the letter/productivity argument
and are evaluated in the log domain where exponents can grow.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import expit, logit

from ._rng import substream
from .errors import ConfigError, InputError
from .params import IntegrationConfig, ModelParams

_CHUNK = 25_000  # draws processed per block in Monte Carlo loops


def _asarray(x):
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _restore(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def cover_letter_quality(q, rho, nu, params: ModelParams):
    """Letter quality produced by a worker: q + rho*A + nu."""
    return q + rho * params.A + nu


def access_posterior(h, params: ModelParams):
    """Posterior probability that a letter of quality h was tool-assisted.

    Equals p * f1(h) / (p * f1(h) + (1-p) * f0(h)) where f1, f0 are the
    normal densities of letters with and without the tool. Computed as a
    logistic of the log likelihood ratio, which is linear in h, so the
    result is stable for arbitrarily large |h|.
    """
    h_arr, scalar = _asarray(h)
    if params.A == 0.0:
        return _restore(np.full_like(h_arr, params.p), scalar)
    z = logit(params.p) + (2.0 * params.A * (h_arr - params.mu0) - params.A**2) / (
        2.0 * params.total_var
    )
    return _restore(expit(z), scalar)


def expected_productivity(h, params: ModelParams):
    """Employer's expected productivity given letter quality h.

    mu0 + shrinkage * (h - mu0 - A * g(h)): the usual normal signal
    extraction, minus the discount employers apply for the possibility
    that the letter was tool-assisted.
    """
    h_arr, scalar = _asarray(h)
    g = access_posterior(h_arr, params)
    out = params.mu0 + params.shrinkage * (h_arr - params.mu0 - params.A * np.asarray(g))
    return _restore(out, scalar)


def expected_productivity_slope(h, params: ModelParams):
    """Analytic derivative of expected_productivity in h.

    shrinkage * (1 - A^2/(tau2+sigma2) * g(h)(1-g(h))); strictly below the
    shrinkage weight whenever A > 0, which is how tool availability damps
    the informativeness of letters.
    """
    h_arr, scalar = _asarray(h)
    g = np.asarray(access_posterior(h_arr, params))
    out = params.shrinkage * (1.0 - params.A**2 / params.total_var * g * (1.0 - g))
    return _restore(out, scalar)


def hire_prob_binary(h, params: ModelParams):
    """Probability one applicant beats the outside option: logistic of E[q|h]."""
    h_arr, scalar = _asarray(h)
    return _restore(expit(np.asarray(expected_productivity(h_arr, params))), scalar)


def hire_prob_conditional(h_vec, params: ModelParams):
    """Hiring probabilities of N applicants given all their letters.

    Entry i is exp(E[q_i|h_i]) / (1 + sum_k exp(E[q_k|h_k])); the residual
    mass is the outside option, so entries sum to strictly less than 1.
    """
    h_arr = np.asarray(h_vec, dtype=float)
    if h_arr.ndim != 1 or h_arr.shape[0] != params.N:
        raise InputError(f"expected {params.N} letters, got shape {h_arr.shape}")
    e = np.asarray(expected_productivity(h_arr, params))
    m = max(float(e.max()), 0.0)
    w = np.exp(e - m)
    return w / (math.exp(-m) + w.sum())


def rival_quality_density(h, params: ModelParams):
    """Unconditional density of a rival's letter quality.

    Two-component normal mixture: with probability 1-p the rival writes
    unassisted, N(mu0, tau2+sigma2); with probability p the letter is
    shifted by A.
    """
    h_arr, scalar = _asarray(h)
    v = params.total_var
    norm = 1.0 / math.sqrt(2.0 * math.pi * v)
    f0 = norm * np.exp(-((h_arr - params.mu0) ** 2) / (2.0 * v))
    f1 = norm * np.exp(-((h_arr - params.mu0 - params.A) ** 2) / (2.0 * v))
    return _restore((1.0 - params.p) * f0 + params.p * f1, scalar)


def _own_over_denominator(e_own: np.ndarray, rival_sum: np.ndarray) -> np.ndarray:
    """exp(e_own) / (1 + exp(e_own) + rival_sum), overflow-safe in e_own.

    e_own has shape (n, 1) and rival_sum shape (1, m) (or conformable);
    the shift by max(e_own, 0) keeps every exponent non-positive.
    """
    m = np.maximum(e_own, 0.0)
    num = np.exp(e_own - m)
    return num / (np.exp(-m) + num + rival_sum * np.exp(-m))


def _rival_exp_sums(params: ModelParams, z: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sum over rivals of exp(E[q|h_k]) for each Monte Carlo draw."""
    rival_h = params.mu0 + params.A * b + math.sqrt(params.total_var) * z
    e = np.asarray(expected_productivity(rival_h, params))
    return np.exp(e).sum(axis=1)


def _exante_mc(h_arr: np.ndarray, params: ModelParams, cfg: IntegrationConfig) -> np.ndarray:
    rng = substream(cfg.seed, "hire_prob_ex_ante")
    e_own = np.asarray(expected_productivity(h_arr, params))[:, None]
    total = np.zeros(h_arr.shape[0])
    remaining = cfg.draws
    while remaining > 0:
        n = min(_CHUNK, remaining)
        z = rng.standard_normal((n, params.N - 1))
        b = rng.random((n, params.N - 1)) < params.p
        s = _rival_exp_sums(params, z, b)
        total += _own_over_denominator(e_own, s[None, :]).sum(axis=1)
        remaining -= n
    return total / cfg.draws


def _exante_gh(h_arr: np.ndarray, params: ModelParams, cfg: IntegrationConfig) -> np.ndarray:
    """Tensor-product Gauss-Hermite over the N-1 rival letters.

    The rival mixture is expanded into its 2^(N-1) component assignments,
    each an (N-1)-dimensional Gaussian integral.
    """
    n_riv = params.N - 1
    if cfg.nodes**n_riv > 2_000_000:
        raise ConfigError(
            f"gauss_hermite infeasible for N={params.N} with {cfg.nodes} nodes; use monte_carlo"
        )
    x, w = hermgauss(cfg.nodes)
    wn = w / math.sqrt(math.pi)
    scale = math.sqrt(2.0 * params.total_var)
    exp_e = [
        np.exp(np.asarray(expected_productivity(params.mu0 + a * params.A + scale * x, params)))
        for a in (0, 1)
    ]
    e_own = np.asarray(expected_productivity(h_arr, params))[:, None]
    total = np.zeros(h_arr.shape[0])
    for assignment in itertools.product((0, 1), repeat=n_riv):
        mix_w = math.prod(params.p if a else 1.0 - params.p for a in assignment)
        s = np.zeros([1] * n_riv)
        node_w = np.ones([1] * n_riv)
        for d, a in enumerate(assignment):
            shape = [1] * n_riv
            shape[d] = cfg.nodes
            s = s + exp_e[a].reshape(shape)
            node_w = node_w * wn.reshape(shape)
        s = s.ravel()
        node_w = node_w.ravel()
        total += mix_w * (_own_over_denominator(e_own, s[None, :]) * node_w[None, :]).sum(axis=1)
    return total


def hire_prob_ex_ante(h, params: ModelParams, cfg: IntegrationConfig):
    """Hiring probability given own letter h, integrating out N-1 rivals.

    Rival letters are i.i.d. draws from rival_quality_density. Array h is
    evaluated against one shared draw block (common random numbers), so a
    curve over a grid is smooth and differences across nearby h carry far
    less Monte Carlo noise than the pointwise level.
    """
    h_arr, scalar = _asarray(h)
    if params.N == 1:
        return hire_prob_binary(h, params)
    if cfg.method == "gauss_hermite":
        out = _exante_gh(h_arr, params, cfg)
    else:
        out = _exante_mc(h_arr, params, cfg)
    return _restore(out, scalar)


def _check_regime(regime_A: float, params: ModelParams) -> ModelParams:
    if not (abs(regime_A) < 1e-12 or abs(regime_A - params.A) < 1e-12):
        raise InputError(f"regime_A must be 0 or params.A={params.A}, got {regime_A}")
    return params.with_shift(regime_A)


def hire_prob_given_q(q, rho, regime_A, params: ModelParams, cfg: IntegrationConfig):
    """Hiring probability of a worker of productivity q and access rho.

    regime_A selects the employer-belief regime: 0 for the pre-tool world
    (beliefs and rivals evaluated with A = 0) and params.A for the
    post-tool world. The worker's own letter is q + rho*regime_A + nu; the
    shock nu and the rival letters are integrated out jointly.
    """
    q_arr, scalar = _asarray(q)
    regime = _check_regime(float(regime_A), params)
    shift = float(rho) * regime.A
    if cfg.method == "gauss_hermite":
        x, w = hermgauss(cfg.nodes)
        wn = w / math.sqrt(math.pi)
        nu_nodes = math.sqrt(2.0 * params.sigma2) * x
        h_all = (q_arr[:, None] + shift + nu_nodes[None, :]).ravel()
        p_all = np.asarray(hire_prob_ex_ante(h_all, regime, cfg)).reshape(q_arr.shape[0], -1)
        return _restore(p_all @ wn, scalar)

    rng = substream(cfg.seed, "hire_prob_given_q")
    sd_nu = math.sqrt(params.sigma2)
    total = np.zeros(q_arr.shape[0])
    remaining = cfg.draws
    while remaining > 0:
        n = min(_CHUNK, remaining)
        nu = sd_nu * rng.standard_normal(n)
        if regime.N > 1:
            z = rng.standard_normal((n, regime.N - 1))
            b = rng.random((n, regime.N - 1)) < regime.p
            s = _rival_exp_sums(regime, z, b)[None, :]
        else:
            s = np.zeros((1, n))
        own_h = q_arr[:, None] + shift + nu[None, :]
        e_own = np.asarray(expected_productivity(own_h, regime))
        total += _own_over_denominator(e_own, s).sum(axis=1)
        remaining -= n
    return _restore(total / cfg.draws, scalar)


def hire_prob_ex_ante_given_q(q, params: ModelParams, cfg: IntegrationConfig):
    """Post-tool hiring probability by productivity, before access is known.

    Averages hire_prob_given_q over rho ~ Bernoulli(p) under the post
    regime; both branches share draws, so the average inherits the common
    random numbers.
    """
    treated = hire_prob_given_q(q, 1, params.A, params, cfg)
    control = hire_prob_given_q(q, 0, params.A, params, cfg)
    return params.p * treated + (1.0 - params.p) * control
