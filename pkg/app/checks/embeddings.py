#!/usr/bin/env python3
"""
Embeddings between shear anisotropic and dyadic spaces, and the sequence
characterization of the shear anisotropic norms.

Exact inequalities (q-monotonicity, the epsilon trade and the B/F/B sandwich)
are asserted termwise. Cross embeddings and norm equivalences are finite
dimensional here, so they are asserted as stable measured ratios.
"""
import logging
import math
from typing import Dict, List, Tuple

import numpy as np

from app.checks.common import check_rng, dyadic_for, materialize, open_frame, spread, stability
from app.checks.report import CheckReport
from app.config import RunConfig
from core.frame import Frame
from core.lattice import cell_volume
from core.spaces import (
    MaximalParams,
    SmoothnessParams,
    besov_AB_norm,
    besov_seq_norm,
    dyadic_norms,
    lp_sum,
    maximal_sequence,
    tl_AB_norm,
    tl_seq_norm,
)
from core.transform import (
    SequenceCoefficients,
    band_limited_random,
    dyadic_forward,
    forward_grid,
    subsample,
)

logger = logging.getLogger(__name__)

# (p, q, alpha1, alpha2)
Tuple4 = Tuple[float, float, float, float]

SPARSE_TRIALS = 100
SPARSE_TERMS = 100
EXACT_TRIALS = 50


class HypothesisError(ValueError):
    """A parameter tuple outside the range where an embedding is claimed."""


def besov_lambda(p: float) -> float:
    """lambda = -1 for p <= 1, p/2 + 1/4 for 1 < p < inf."""
    if math.isinf(p):
        raise HypothesisError("Besov into AB-Besov is not claimed for p = inf")
    return -1.0 if p <= 1 else p / 2 + 0.25


def ab_besov_lambda(d: int, p: float) -> float:
    """lambda = 0 for p <= 1, d(p-1)/p + 1/4 for 1 < p < inf."""
    if math.isinf(p):
        raise HypothesisError("AB-Besov into Besov is not claimed for p = inf")
    return 0.0 if p <= 1 else d * (p - 1) / p + 0.25


def tl_lambda(d: int, p: float, q: float) -> float:
    """lambda = d max(1, 1/q, 1/p) + 1/4."""
    return d * max(1.0, 1.0 / q, 1.0 / p) + 0.25


def besov_to_ab(d: int, p: float, q: float, alpha1: float, alpha2: float) -> float:
    """
    Check 2 d lambda / p + (d-1)/q + (d+1) alpha2 < 2 alpha1 for B^{alpha1} into B^{alpha2}(AB).

    Returns:
        float: the slack 2 alpha1 - left side

    Raises:
        HypothesisError: If the inequality fails or p = inf
    """
    lam = besov_lambda(p)
    left = 2 * d * lam / p + (d - 1) / q + (d + 1) * alpha2
    if not left < 2 * alpha1:
        raise HypothesisError(
            f"2d*lambda/p + (d-1)/q + (d+1)*alpha2 = {left:.4f} is not < 2*alpha1 = {2 * alpha1:.4f}"
        )
    return 2 * alpha1 - left


def ab_to_besov(d: int, p: float, q: float, alpha1: float, alpha2: float) -> float:
    """
    Check 2d + lambda + 2(alpha1 + s(d-1)) < (d+1)(alpha2 + 1) for B^{alpha2}(AB) into B^{alpha1},
    s = [max(1, 1/p) - min(1, 1/q)] / 2.

    Raises:
        HypothesisError: If the inequality fails or p = inf
    """
    lam = ab_besov_lambda(d, p)
    s = (max(1.0, 1.0 / p) - min(1.0, 1.0 / q)) / 2
    left = 2 * d + lam + 2 * (alpha1 + s * (d - 1))
    right = (d + 1) * (alpha2 + 1)
    if not left < right:
        raise HypothesisError(f"2d + lambda + 2(alpha1 + s(d-1)) = {left:.4f} is not < (d+1)(alpha2+1) = {right:.4f}")
    return right - left


def tl_to_ab(d: int, p: float, q: float, alpha1: float, alpha2: float) -> float:
    """
    Check (d+1) alpha2 + (d-1)/q + lambda <= 2 alpha1 for F^{alpha1} into F^{alpha2}(AB).

    Raises:
        HypothesisError: If the inequality fails or p = inf
    """
    if math.isinf(p):
        raise HypothesisError("Triebel-Lizorkin embeddings need p < inf")
    left = (d + 1) * alpha2 + (d - 1) / q + tl_lambda(d, p, q)
    if not left <= 2 * alpha1:
        raise HypothesisError(f"(d+1)alpha2 + (d-1)/q + lambda = {left:.4f} exceeds 2*alpha1 = {2 * alpha1:.4f}")
    return 2 * alpha1 - left


def ab_to_tl(d: int, p: float, q: float, alpha1: float, alpha2: float) -> float:
    """
    Check 2 alpha1 + d + (d-1)(1 - 1/q)_+ <= (d+1) alpha2 + 1 for F^{alpha2}(AB) into F^{alpha1}.

    Raises:
        HypothesisError: If the inequality fails or p = inf
    """
    if math.isinf(p):
        raise HypothesisError("Triebel-Lizorkin embeddings need p < inf")
    left = 2 * alpha1 + d + (d - 1) * max(0.0, 1 - 1 / q)
    right = (d + 1) * alpha2 + 1
    if not left <= right:
        raise HypothesisError(f"2alpha1 + d + (d-1)(1-1/q)_+ = {left:.4f} exceeds (d+1)alpha2 + 1 = {right:.4f}")
    return right - left


def cross_tuples(d: int, p: float, q: float) -> Dict[str, Tuple4]:
    """
    One (p, q, alpha1, alpha2) per cross embedding, inside its hypothesis with a fixed margin.

    alpha1 belongs to the dyadic space, alpha2 to the shear anisotropic one.
    """
    tuples = {}
    if not math.isinf(p):
        lam = besov_lambda(p)
        tuples['besov_to_ab'] = (p, q, (2 * d * lam / p + (d - 1) / q) / 2 + 0.5, 0.0)
        s = (max(1.0, 1.0 / p) - min(1.0, 1.0 / q)) / 2
        lam = ab_besov_lambda(d, p)
        tuples['ab_to_besov'] = (p, q, 0.0, (2 * d + lam + 2 * s * (d - 1)) / (d + 1) - 1 + 0.5)
        tuples['tl_to_ab'] = (p, q, ((d - 1) / q + tl_lambda(d, p, q)) / 2 + 0.25, 0.0)
        tuples['ab_to_tl'] = (p, q, 0.0, (d + (d - 1) * max(0.0, 1 - 1 / q) - 1) / (d + 1) + 0.25)
    return tuples


HYPOTHESES = {
    'besov_to_ab': besov_to_ab,
    'ab_to_besov': ab_to_besov,
    'tl_to_ab': tl_to_ab,
    'ab_to_tl': ab_to_tl,
}


def _cross_ratio(name: str, frame: Frame, shear_field, dyadic_field, system, p, q, alpha1, alpha2) -> float:
    dyadic = SmoothnessParams(alpha1, p, q)
    shear = SmoothnessParams(alpha2, p, q)
    if name == 'besov_to_ab':
        return besov_AB_norm(frame, shear_field, shear) / dyadic_norms(dyadic_field, dyadic, 'B', system)
    if name == 'ab_to_besov':
        return dyadic_norms(dyadic_field, dyadic, 'B', system) / besov_AB_norm(frame, shear_field, shear)
    if name == 'tl_to_ab':
        return tl_AB_norm(frame, shear_field, shear) / dyadic_norms(dyadic_field, dyadic, 'F', system)
    return dyadic_norms(dyadic_field, dyadic, 'F', system) / tl_AB_norm(frame, shear_field, shear)


def epsilon_constant(frame: Frame, epsilon: float, q0: float) -> float:
    """(sum_b |Q_b|^{epsilon q0})^{1/q0} over the shear atoms."""
    volumes = [cell_volume(atom.band.j, frame.d) ** epsilon for atom in frame.shear_atoms]
    return lp_sum(volumes, q0)


def _exceeds(left: float, right: float, tolerance: float) -> bool:
    return left > right * (1.0 + tolerance) + tolerance


def check_embeddings(frame: Frame, config: RunConfig) -> CheckReport:
    """Sobolev-type embeddings exactly and the four cross embeddings as bounded ratios."""
    rng = check_rng(config.seed, 'embeddings')
    d = frame.d
    tolerance = config.threshold('exact')
    system = dyadic_for(frame.spec)
    alpha = config.alphas[0]
    p_exact = next((p for p in config.ps if not math.isinf(p)), 2.0)

    q1, q0 = 1.0, 2.0
    epsilon = (d - 1) / ((d + 1) * q0) + 0.25
    eps_constant = max(1.0, epsilon_constant(frame, epsilon, q0))

    violations = {'q_monotonicity': 0, 'epsilon_trade': 0, 'sandwich': 0}
    epsilon_ratios = []
    tuples: Dict[str, Tuple4] = {}
    for p in config.ps:
        for q in config.qs:
            for name, values in cross_tuples(d, p, q).items():
                HYPOTHESES[name](d, *values)
                tuples[f"{name}(p={p},q={q})"] = values
    rejected = []
    try:
        HYPOTHESES['tl_to_ab'](d, 2.0, 2.0, 0.0, 0.0)
    except HypothesisError as e:
        rejected.append(str(e))
    ratios: Dict[str, List[float]] = {key: [] for key in tuples}

    trials = max(config.trials, EXACT_TRIALS)
    for trial in range(trials):
        f = band_limited_random(d, frame.N, rng)
        field = materialize(forward_grid(frame, f, config.workers))

        low = SmoothnessParams(alpha, p_exact, q1)
        high = SmoothnessParams(alpha, p_exact, q0)
        if _exceeds(besov_AB_norm(frame, field, high), besov_AB_norm(frame, field, low), tolerance):
            violations['q_monotonicity'] += 1
        if _exceeds(tl_AB_norm(frame, field, high), tl_AB_norm(frame, field, low), tolerance):
            violations['q_monotonicity'] += 1

        smoother = besov_AB_norm(frame, field, SmoothnessParams(alpha + epsilon, p_exact, 4.0))
        rougher = besov_AB_norm(frame, field, high)
        epsilon_ratios.append(rougher / smoother)
        if _exceeds(rougher, eps_constant * smoother, tolerance):
            violations['epsilon_trade'] += 1

        b_min = besov_AB_norm(frame, field, SmoothnessParams(alpha, 2.0, 2.0))
        f_mid = tl_AB_norm(frame, field, SmoothnessParams(alpha, 2.0, 4.0))
        b_max = besov_AB_norm(frame, field, SmoothnessParams(alpha, 2.0, 4.0))
        if _exceeds(f_mid, b_min, tolerance) or _exceeds(b_max, f_mid, tolerance):
            violations['sandwich'] += 1

        if trial < config.trials and tuples:
            dyadic_field = materialize(dyadic_forward(system, f, config.workers))
            for key, (p, q, alpha1, alpha2) in tuples.items():
                name = key.split('(')[0]
                ratios[key].append(_cross_ratio(name, frame, field, dyadic_field, system, p, q, alpha1, alpha2))

    limit = config.threshold('stability_spread')
    cross = {
        key: {'alpha1': tuples[key][2], 'alpha2': tuples[key][3],
              'median': float(np.median(values)), 'max_over_median': stability(values)}
        for key, values in ratios.items()
    }
    passed = (
        not any(violations.values())
        and all(c['max_over_median'] <= limit for c in cross.values())
        and stability(epsilon_ratios) <= limit
    )
    notes = [f"rejected example tuple: {r}" for r in rejected]
    if any(math.isinf(p) for p in config.ps):
        notes.append("p = inf excluded from the cross embeddings")
    return CheckReport(
        check_name='embeddings',
        parameters={'d': d, 'N': frame.N, 'alpha': alpha, 'p': p_exact, 'q1': q1, 'q0': q0,
                    'epsilon': epsilon, 'exact_trials': trials, 'cross_trials': config.trials},
        measured={
            'violations': violations,
            'epsilon_constant': eps_constant,
            'epsilon_ratio_max': max(epsilon_ratios),
            'cross': cross,
        },
        threshold={'exact': tolerance, 'stability_spread': limit},
        passed=bool(passed),
        notes=notes,
    )


def random_sparse_sequence(template: SequenceCoefficients, terms: int, rng: np.random.Generator) -> SequenceCoefficients:
    """A copy of the template with `terms` random entries set to standard normal values."""
    bands = list(template.bands)
    sizes = np.array([template.bands[b].size for b in bands])
    flat = rng.choice(int(sizes.sum()), size=min(terms, int(sizes.sum())), replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    values = {b: np.zeros(template.bands[b].size) for b in bands}
    for index, value in zip(flat, rng.standard_normal(len(flat))):
        owner = int(np.searchsorted(offsets, index, side='right')) - 1
        values[bands[owner]][index - offsets[owner]] = value
    return SequenceCoefficients(template.d, template.N, values, 0.0, template.kind)


def check_characterization(frame: Frame, config: RunConfig) -> CheckReport:
    """
    Distribution vs sequence norms of the same f, and the s*-equivalence of f_AB.

    B_AB(f) / b_AB(S f) and F_AB(f) / f_AB(S f) must stay in a narrow band
    across random f; ||s||_f <= ||s*||_f is exact and ||s*||_f / ||s||_f must
    be stable over random sparse sequences.
    """
    rng = check_rng(config.seed, 'characterization')
    work = open_frame(frame, config.workers)
    d = work.d
    params_list = [SmoothnessParams(a, p, q) for a in config.alphas for p in config.ps for q in config.qs]

    besov, tl = {}, {}
    for _ in range(config.trials):
        f = band_limited_random(d, work.N, rng, radius=work.spec.passband)
        field = materialize(forward_grid(work, f, config.workers))
        s = subsample(work, field)
        for params in params_list:
            key = f"alpha={params.alpha},p={params.p},q={params.q}"
            besov.setdefault(key, []).append(besov_AB_norm(work, field, params) / besov_seq_norm(s, params))
            if not math.isinf(params.p):
                tl.setdefault(key, []).append(tl_AB_norm(work, field, params) / tl_seq_norm(s, params, work))

    finite = [p for p in params_list if not math.isinf(p.p)]
    star_params = finite[0] if finite else SmoothnessParams(0.0, 2.0, 2.0)
    maximal = MaximalParams(r=1.0, N_decay=d + 2)
    template = subsample(work, forward_grid(work, band_limited_random(d, work.N, rng, radius=0)))
    left_violations = 0
    star_ratios = []
    for _ in range(SPARSE_TRIALS):
        s = random_sparse_sequence(template, SPARSE_TERMS, rng)
        plain = tl_seq_norm(s, star_params, work)
        starred = tl_seq_norm(maximal_sequence(s, maximal), star_params, work)
        if _exceeds(plain, starred, config.threshold('exact')):
            left_violations += 1
        star_ratios.append(starred / plain)

    limit = config.threshold('stability_spread')
    summary = {}
    for label, table in (('besov', besov), ('triebel_lizorkin', tl)):
        for key, values in table.items():
            summary[f"{label}[{key}]"] = {
                'min': min(values), 'max': max(values), 'spread': spread(values),
                'C': max(max(values), 1.0 / min(values)),
            }
    passed = (
        all(entry['spread'] <= limit for entry in summary.values())
        and left_violations == 0
        and stability(star_ratios) <= limit
    )
    return CheckReport(
        check_name='characterization',
        parameters={'d': d, 'N': work.N, 'j_max': work.j_max, 'trials': config.trials,
                    'sparse_trials': SPARSE_TRIALS, 'sparse_terms': SPARSE_TERMS,
                    'r': maximal.r, 'N_decay': maximal.N_decay, 's_star_params': star_params.to_dict()},
        measured={
            'ratios': summary,
            's_star_left_violations': left_violations,
            's_star_ratio_max': max(star_ratios),
            's_star_max_over_median': stability(star_ratios),
        },
        threshold={'stability_spread': limit, 'exact': config.threshold('exact')},
        passed=bool(passed),
    )
