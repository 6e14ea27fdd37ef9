"""Experiment kinds: each returns raw rows, a summary and the invariant checks."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..densities import (constant_density, dvp_density, holder_density, lp_norm, morrey_norm,
                         periodized_bump, random_trig_density, scale_density, single_mode)
from ..engine import avg_sq_x, avg_sq_xr, lower_bound_scale, make_kernel, montgomery_certificate
from ..jittered import jitter_closed_form, jitter_mc
from ..spectral import BallWeights, RadialWeights, radial_weight
from ..torus import PartitionCells, WeightedPointSet, grid_points, jitter_generator, weight_norm
from .config import ExperimentConfig
from .fitting import fit_exponent


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentResult:
    kind: str
    rows: list
    summary: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def write(self, out_dir, config):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        cols = []
        for row in self.rows:
            cols += [k for k in row if k not in cols]
        with open(out / "raw.csv", "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=cols)
            wr.writeheader()
            for row in self.rows:
                wr.writerow(row)
        summary = dict(self.summary)
        summary["checks"] = [c.__dict__ for c in self.checks]
        summary["passed"] = self.passed
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=_num))
        echo = config.to_dict()
        echo["config_hash"] = config_hash(config)
        echo["package_version"] = __version__
        (out / "config_echo.json").write_text(json.dumps(echo, indent=2, sort_keys=True))
        return out


def _num(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def config_hash(config):
    return hashlib.sha256(json.dumps(config.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


# ------------------------------------------------------------------ helpers

def build_density(spec, d, H=None):
    """Density from a config block ``{"recipe": ..., **params}``."""
    spec = dict(spec or {"recipe": "constant"})
    recipe = spec.pop("recipe", "constant")
    if recipe == "constant":
        f = constant_density(spec.get("c", 1.0), d)
    elif recipe == "single_mode":
        k = spec.get("k", 1)
        f = single_mode(k, spec.get("amplitude", 1.0), d)
    elif recipe == "random_trig":
        rng = np.random.Generator(jitter_generator(spec.get("seed", 0), 1 << 40))
        f = random_trig_density(d, spec.get("bandwidth", 3), rng)
    elif recipe == "periodized_bump":
        f = periodized_bump(spec.get("M", 4), d)
    elif recipe == "dvp":
        f = dvp_density(spec.get("n", 4), d)
    elif recipe == "holder_sample":
        f = holder_density(spec.get("beta", 1.0), d, shape=spec.get("shape", "lacunary"))
    else:
        raise ValueError(f"unknown density recipe {recipe!r}")
    if H is not None and spec.get("scaled", recipe == "periodized_bump"):
        f = scale_density(f, H)
    return f


def _window(cfg):
    return BallWeights(cfg.d, cfg.r) if cfg.r is not None else RadialWeights(cfg.d, cfg.a, cfg.b)


def _value(ps, f, cfg, method="pair"):
    if cfg.r is not None:
        return avg_sq_x(ps, f, cfg.r, tolerance=cfg.tolerance, method=method)
    return avg_sq_xr(ps, f, cfg.a, cfg.b, tolerance=cfg.tolerance, method=method)


def envelope_coefficient(w):
    """c with w(m) <= c |m|^(-d-1) for all m != 0 (d <= 2)."""
    if w.dim > 2:
        raise ValueError("pure power envelope only for d <= 2")
    rho = 1e6
    return float(w.bound(rho) * rho ** (w.dim + 1))


def inverse_power_tail(d, K):
    """Upper bound for sum over |k| > K of |k|^(-d-1), d in {1, 2}."""
    L = max(64, 4 * int(math.ceil(K)))
    axis = np.arange(-L, L + 1)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    rho = np.sqrt(sum(g.astype(float) ** 2 for g in mesh)).ravel()
    sel = (rho > K) & (rho <= L)
    head = math.fsum(rho[sel] ** (-d - 1.0))
    if d == 1:
        return head + 2.0 / L
    # each unit cell around k sits in |x| > |k| - 1/sqrt 2
    s = math.sqrt(0.5)
    return head + (1 + s / L) ** 3 * 2 * math.pi / (L - s)


def _grid_power(N, d):
    H = round(N ** (1.0 / d))
    return H if H**d == N else None


def _family_points(family, N, d, seed, rep):
    gen_key = {"jittered": 0, "grid_shift": 1, "iid": 2}[family]
    if family == "jittered":
        H = _grid_power(N, d)
        if H is None:
            raise ValueError(f"jittered family needs N = H^d, got N={N}")
        cells = PartitionCells(d, H)
        u = np.random.Generator(jitter_generator(seed, rep)).random((cells.N, 4))[:, :d]
        return WeightedPointSet(cells.lower_corners + u * cells.side)
    gen = np.random.Generator(jitter_generator(seed, (gen_key << 40) + rep))
    if family == "grid_shift":
        H = _grid_power(N, d)
        if H is None:
            raise ValueError(f"grid_shift family needs N = H^d, got N={N}")
        return WeightedPointSet(grid_points(H, d).points + gen.random(d))
    return WeightedPointSet(gen.random((N, d)) - 0.5)


def _slope_check(name, N, vals, target, tol):
    fit = fit_exponent(N, vals)
    ok = fit.within(target, tol)
    detail = f"slope {fit.slope:.4f}, target {target:.4f} +/- {tol}"
    if not ok:
        detail += "; points " + ", ".join(f"({n}, {v:.6g})" for n, v in zip(N, vals))
    return fit, Check(name, ok, detail)


# -------------------------------------------------------------------- kinds

def run_lp_sharp(cfg):
    """Grid points against a scaled bump: N^(1+q/2d) ||f||_p^(q/d) value stays bounded."""
    d, p = cfg.d, cfg.p
    q = p / (p - 1.0)
    spec = dict(cfg.density)
    M0 = spec.get("M", 4)
    F = periodized_bump(M0, d)
    normF = lp_norm(F, p)  # ||F(H .)||_p = ||F||_p
    w = _window(cfg)
    rows = []
    for H in cfg.H:
        ps = grid_points(H, d)
        f = scale_density(F, H)
        rep = _value(ps, f, cfg)
        Q = ps.N ** (1 + q / (2 * d)) * normF ** (q / d) * rep.value
        rows.append({"H": H, "N": ps.N, "value": rep.value, "tail_bound": rep.tail_bound,
                     "norm_p": normF, "Q": Q})
    checks, summary = [], {"bump_M": M0, "Q_max": max(r["Q"] for r in rows)}
    if all(r["value"] > 0 for r in rows):
        summary["value_slope"] = fit_exponent([r["N"] for r in rows], [r["value"] for r in rows]).slope
    if p == 2 and d <= 2:
        # value = sum_{k != 0} w(Hk)|1 - F_hat(k)|^2 <= c H^(-d-1) sum |1 - F_hat(k)|^2 |k|^(-d-1)
        c = envelope_coefficient(w)
        modes = F.modes[np.any(F.modes != 0, axis=1)]
        gap = np.abs(1 - F.coeff_at(modes)) ** 2
        kn = np.sqrt(np.sum(modes.astype(float) ** 2, axis=1))
        Rsupp = float(np.max(kn))
        S = math.fsum(gap[gap > 0] * kn[gap > 0] ** (-d - 1.0)) + inverse_power_tail(d, Rsupp)
        C = c * normF ** (2.0 / d) * S
        summary["envelope_constant"] = C
        bad = [(r["H"], r["Q"]) for r in rows if r["Q"] > C * (1 + 1e-12) + 1e-15]
        checks.append(Check("normalized_bounded", not bad,
                            f"max Q {summary['Q_max']:.6g} vs envelope {C:.6g}" + (f"; over: {bad}" if bad else "")))
    else:
        spread = summary["Q_max"] / min(r["Q"] for r in rows)
        checks.append(Check("normalized_bounded", bool(np.isfinite(summary["Q_max"])),
                            f"no explicit envelope for p={p}, d={d}; Q spread {spread:.3g}"))
    return ExperimentResult("lp_sharp", rows, summary, checks)


def run_morrey_sharp(cfg):
    """Grid points, bumps of growing width: Morrey norms grow, value tracked in both normalizations."""
    d, lam = cfg.d, cfg.lam
    rows = []
    for M0 in cfg.bump_M:
        F = periodized_bump(M0, d)
        normF = morrey_norm(F, lam)
        for H in cfg.H:
            ps = grid_points(H, d)
            f = scale_density(F, H)
            rep = _value(ps, f, cfg)
            rows.append({"bump_M": M0, "H": H, "N": ps.N, "value": rep.value, "morrey_lower": normF,
                         "Q_statement": ps.N ** (1 + 1 / lam) * normF ** (1 / lam) * rep.value,
                         "Q_proof": ps.N ** (1 + 1 / d) * normF ** (1 / lam) * rep.value})
    norms = [r["morrey_lower"] for r in rows if r["H"] == cfg.H[0]]
    qp = [r["Q_proof"] for r in rows]
    checks = [
        Check("norms_grow", all(b > a for a, b in zip(norms, norms[1:])), f"Morrey norms {norms}"),
        Check("proof_rate_bounded", min(qp) > 0 and max(qp) / min(qp) < 10.0,
              f"Q_proof range [{min(qp):.4g}, {max(qp):.4g}]"),
    ]
    summary = {"Q_proof_max": max(qp), "Q_proof_min": min(qp),
               "Q_statement_max": max(r["Q_statement"] for r in rows),
               "note": "Morrey norms are lower estimates; Q_statement uses the N^(-1-1/lambda) rate"}
    if len(cfg.H) >= 3 and min(qp) > 0:
        top = [r for r in rows if r["bump_M"] == cfg.bump_M[-1]]
        summary["Q_statement_slope"] = fit_exponent([r["N"] for r in top], [r["Q_statement"] for r in top]).slope
    return ExperimentResult("morrey_sharp", rows, summary, checks)


def _lower(cfg, mode):
    d = cfg.d
    f = build_density(cfg.density, d)
    norm = lp_norm(f, cfg.p) if mode == "p" else morrey_norm(f, cfg.lam)
    reps = max(1, cfg.replicates)
    rows, checks, summary = [], [], {"density_norm": norm, "families": {}}
    for fam in cfg.families:
        mins = []
        for N in cfg.N:
            ratios = []
            for rep in range(reps):
                ps = _family_points(fam, N, d, cfg.seed, rep)
                val = avg_sq_xr(ps, f, cfg.a, cfg.b, method="pair").value
                kw = {"p": cfg.p} if mode == "p" else {"lam": cfg.lam}
                scale = lower_bound_scale(d, N, weight_norm(ps), norm, **kw)
                ratios.append(val / scale)
                rows.append({"family": fam, "N": N, "replicate": rep, "value": val, "scale": scale,
                             "ratio": val / scale})
            mins.append(min(ratios))
        spread = max(mins) / min(mins) if min(mins) > 0 else math.inf
        summary["families"][fam] = {"min_ratio_by_N": dict(zip(map(str, cfg.N), mins)), "spread": spread,
                                    "floor": min(mins)}
        checks.append(Check(f"{fam}_positive", min(mins) > 0, f"floor {min(mins):.4g}"))
        checks.append(Check(f"{fam}_stable", spread < 10.0, f"min-ratio spread over N {spread:.3g}"))
    return rows, summary, checks


def run_lp_lower(cfg):
    rows, summary, checks = _lower(cfg, "p")
    return ExperimentResult("lp_lower", rows, summary, checks)


def run_morrey_lower(cfg):
    rows, summary, checks = _lower(cfg, "lam")
    return ExperimentResult("morrey_lower", rows, summary, checks)


def run_jitter_rates(cfg):
    """f fixed, N = H^d: r-averaged J slope and the fixed-r ceiling J <= |B_r| N^-1 ||f||^2."""
    d = cfg.d
    f = build_density(cfg.density, d)
    l2 = f.l2_sq()
    radii = [cfg.r] if cfg.r is not None else [0.05, 0.15, 0.3, 0.45]
    rows, avg, Ns, ceiling, identity = [], [], [], 0.0, []
    for H in cfg.H:
        cells = PartitionCells(d, H)
        est = jitter_closed_form(cells, f, (cfg.a, cfg.b))
        Ns.append(cells.N)
        avg.append(est.closed_form)
        rows.append({"N": cells.N, "r": f"avg[{cfg.a},{cfg.b}]", "J_closed": est.closed_form,
                     "J_mc": math.nan, "stderr": math.nan, "tail_bound": est.tail_bound})
        for r in radii:
            e = jitter_closed_form(cells, f, r)
            row = {"N": cells.N, "r": r, "J_closed": e.closed_form, "J_mc": math.nan,
                   "stderr": math.nan, "tail_bound": e.tail_bound}
            if cfg.replicates:
                mc = jitter_mc(cells, f, r, cfg.replicates, cfg.seed)
                row["J_mc"], row["stderr"] = mc.mc_value, mc.mc_stderr
                e.mc_value, e.mc_stderr = mc.mc_value, mc.mc_stderr
                identity.append((cells.N, r, e.agrees(4.0)))
            ceiling = max(ceiling, e.closed_form * cells.N / l2)
            rows.append(row)
    target = -(1 + 1 / d) if cfg.expected_slope is None else cfg.expected_slope
    fit, chk = _slope_check("r_average_slope", Ns, avg, target, cfg.slope_tolerance)
    C = BallWeights(d, max(radii)).total()
    checks = [chk, Check("fixed_r_ceiling", ceiling <= C * (1 + 1e-9), f"max J N/||f||^2 = {ceiling:.6g} <= {C:.6g}")]
    if identity:
        bad = [(n, r) for n, r, ok in identity if not ok]
        checks.append(Check("identity_4_stderr", not bad, f"failures {bad}" if bad else "all within 4 stderr"))
    summary = {"slope": fit.slope, "intercept": fit.intercept, "ceiling_constant": ceiling}
    return ExperimentResult("jitter_rates", rows, summary, checks)


def run_holder_rates(cfg):
    from ..jittered import holder_rate_experiment

    d, beta = cfg.d, cfg.beta
    rows = holder_rate_experiment(beta, d, cfg.H, cfg.r if cfg.r is not None else 0.25, cfg.seed)
    target = cfg.expected_slope
    if target is None:
        target = -1 - 2 * beta / d if beta < 0.5 else -1 - 1 / d
    fit, chk = _slope_check("holder_slope", [r["N"] for r in rows], [r["J_closed"] for r in rows],
                            target, cfg.slope_tolerance)
    return ExperimentResult("holder_rates", rows, {"slope": fit.slope, "target": target}, [chk])


def run_signed_weights(cfg):
    """alpha = (1, -1) at one point: the point sum cancels, value = w(k)."""
    d = cfg.d
    ps = WeightedPointSet(np.zeros((2, d)), [1.0, -1.0])
    rows = []
    for k in cfg.k:
        mode = np.zeros(d, dtype=np.int64)
        mode[0] = k
        f = single_mode(mode, 1.0, d)
        val = avg_sq_xr(ps, f, cfg.a, cfg.b, method="pair").value
        wk = float(radial_weight(d, cfg.a, cfg.b, float(k)))
        rows.append({"k": k, "value": val, "radial_weight": wk, "rel_diff": abs(val - wk) / wk})
    worst = max(r["rel_diff"] for r in rows)
    fit, chk = _slope_check("decay_slope", [r["k"] for r in rows], [r["value"] for r in rows],
                            -(d + 1.0), cfg.slope_tolerance)
    checks = [Check("equals_radial_weight", worst <= 1e-9, f"max rel diff {worst:.3g}"), chk]
    return ExperimentResult("signed_weights", rows, {"slope": fit.slope, "max_rel_diff": worst}, checks)


def run_certificate_audit(cfg):
    from ..engine import SignedWeightsError

    d = cfg.d
    rows, refused = [], 0
    for N in cfg.N:
        for M in cfg.M:
            kern = make_kernel(cfg.kernel, M, d, cfg.kernel_order)
            for rep in range(max(1, cfg.replicates)):
                gen = np.random.Generator(jitter_generator(cfg.seed, (N << 20) + (M << 8) + rep))
                z = gen.random((N, d)) - 0.5
                alpha = {"uniform": np.ones(N), "random": gen.random(N),
                         "signed": gen.random(N) * 2 - 1}[cfg.alpha]
                ps = WeightedPointSet(z, alpha)
                try:
                    res = montgomery_certificate(ps, kern, strict=False)
                except SignedWeightsError:
                    refused += 1
                    rows.append({"N": N, "M": M, "replicate": rep, "refused": True})
                    continue
                rows.append({"N": N, "M": M, "replicate": rep, "spectral": res.spectral, "pair": res.pair,
                             "bound": res.bound, "rel_diff": res.rel_diff, "holds": res.holds,
                             "agree": res.agree, "refused": False})
    done = [r for r in rows if not r["refused"]]
    checks = []
    if cfg.alpha == "signed":
        checks.append(Check("signed_refused", refused == len(rows), f"{refused}/{len(rows)} refused"))
    else:
        worst = max(r["rel_diff"] for r in done)
        checks += [Check("forms_agree", all(r["agree"] for r in done), f"max rel diff {worst:.3g}"),
                   Check("bound_holds", all(r["holds"] for r in done),
                         f"{sum(not r['holds'] for r in done)} violations")]
    summary = {"configs": len(rows), "refused": refused,
               "min_slack": min((r["pair"] / r["bound"] for r in done), default=math.nan)}
    return ExperimentResult("certificate_audit", rows, summary, checks)


RUNNERS = {
    "lp_lower": run_lp_lower,
    "lp_sharp": run_lp_sharp,
    "morrey_lower": run_morrey_lower,
    "morrey_sharp": run_morrey_sharp,
    "jitter_rates": run_jitter_rates,
    "holder_rates": run_holder_rates,
    "signed_weights": run_signed_weights,
    "certificate_audit": run_certificate_audit,
}


def run(config, out_dir=None):
    """Run one experiment; write raw.csv, summary.json, config_echo.json when out_dir is set."""
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    result = RUNNERS[config.kind](config)
    result.summary.update({"kind": config.kind, "seed": config.seed, "config_hash": config_hash(config)})
    if out_dir is not None:
        result.write(out_dir, config)
    return result
