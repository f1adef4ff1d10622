"""Command-line front end: presets, sweeps, figure CSVs and oracle checks.

Subcommands
-----------
constants    print the system parameters and derived quantities
uncertainty  CSV of the entropic lower bound along a time grid
times        characteristic times (misidentification, complementary, delta*)
bell         CSV of witness eigenvalue scans, or the CP-sensitive test
verify       cross-check the closed forms against their independent oracles

Times are accepted and reported either in mass-splitting units (dm) or in
short-lifetime units (tau_s); all internal math runs in dm units.  A JSON
config file can supply any long option; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .core import (
    K0BAR_DIRECTION, KL_DIRECTION, KS_DIRECTION, MesonParams, Quasispin,
    bmeson_defaults, kaon_defaults, stable_defaults,
)
from .effective import (
    cp_eigenvectors, effective_operator, spectral, bipartite_expectation,
    expectation,
)
from .evolution import (
    embed_surviving, evolve_bipartite, evolve_single_closed,
    joint_probabilities, lindblad_integrate, pure_density, singlet_state,
)
from .uncertainty import (
    bipartite_mu_bound, complementary_time, delta_for_equal_times, misid_time,
    mu_bound,
)
from .bell import (
    CLASSICAL_BOUND, DEFAULT_SEED, TSIRELSON_BOUND, BellSetting, bell_bounds,
    bell_operator, cp_bell_test, sample_witness_max, scan_bell,
)

FIG_CHOICES = ("1a", "1b", "2a", "2b", "2c", "2d", "3a", "3b",
               "4a", "4b", "4c", "5a", "5b")

_POLICY_FOR_FIG = {"4a": "all-equal", "4b": "alternating-1", "4c": "alternating-2",
                   "5a": "alternating-1", "5b": "alternating-1"}


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.11e}"
    return str(x)


def _write_csv(path: str | None, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise SystemExit("config file must hold a JSON object")
    return cfg


def _merged(args: argparse.Namespace, key: str, default):
    val = getattr(args, key, None)
    if val is not None:
        return val
    return args.config_values.get(key.replace("_", "-"),
                                  args.config_values.get(key, default))


def _system_params(args) -> MesonParams:
    system = _merged(args, "system", None)
    gs = _merged(args, "gamma_s", None)
    gl = _merged(args, "gamma_l", None)
    delta = _merged(args, "delta", None)
    if gs is not None or gl is not None:
        if gs is None or gl is None:
            raise SystemExit("custom systems need both --gamma-s and --gamma-l")
        return MesonParams(gamma_s=float(gs), gamma_l=float(gl),
                           delta=float(delta or 0.0), label="custom")
    presets = {"kaon": kaon_defaults, "bmeson": bmeson_defaults,
               "stable": stable_defaults}
    if system is None:
        system = "kaon"
    if system not in presets:
        raise SystemExit(f"unknown preset: {system!r}")
    params = presets[system]()
    if delta is not None:
        params = MesonParams(params.gamma_s, params.gamma_l, float(delta),
                             params.label)
    return params


def _time_scale(args, params: MesonParams) -> float:
    """Multiplier turning input times into dm units."""
    unit = _merged(args, "time_unit", "dm")
    if unit == "dm":
        return 1.0
    if unit == "tau_s":
        if params.gamma_s == 0.0:
            raise SystemExit("tau_s units are undefined for a stable system")
        return 1.0 / params.gamma_s
    raise SystemExit(f"unknown time unit: {unit!r}")


def _grid(args, params, default=(0.0, 6.0, 601)) -> np.ndarray:
    t_min = float(_merged(args, "t_min", default[0]))
    t_max = float(_merged(args, "t_max", default[1]))
    steps = int(_merged(args, "steps", default[2]))
    if steps < 2:
        raise SystemExit("need at least 2 grid points")
    if not t_min < t_max:
        raise SystemExit("t_min must be below t_max")
    return np.linspace(t_min, t_max, steps) * _time_scale(args, params)


def _out_unit_factor(args, params) -> float:
    """Multiplier turning internal dm times into the reporting unit."""
    return 1.0 / _time_scale(args, params)


def _parse_obs(text: str) -> tuple[Quasispin, float]:
    try:
        alpha, phi, t = (float(x) for x in text.split(","))
    except ValueError:
        raise SystemExit(f"malformed observable triple: {text!r} "
                         "(expected alpha,phi,t)")
    return Quasispin(alpha, phi), t


def cmd_constants(args) -> int:
    params = _system_params(args)
    print(f"system={params.label}")
    print(f"gamma_s={params.gamma_s:.11e}")
    print(f"gamma_l={params.gamma_l:.11e}")
    print(f"delta={params.delta:.4g}")
    print(f"gamma_mean={params.gamma_mean:.11e}")
    print(f"delta_gamma={params.delta_gamma:.11e}")
    if params.gamma_s > 0.0:
        print(f"tau_s_dm_units={params.tau_s:.11e}")
    else:
        print("tau_s_dm_units=inf")
    return 0


def _uncertainty_pairs(fig: str, params: MesonParams):
    """Eigenvector-pair builders for the single-system figure presets."""
    if fig in ("1a", "1b"):
        q = Quasispin(0.5 * math.pi, 0.0)
        fixed = spectral(effective_operator(q, 0.0, params))
        return fixed, lambda t: spectral(effective_operator(q, t, params))
    first = {"2a": KS_DIRECTION, "2b": KL_DIRECTION,
             "2c": KS_DIRECTION, "2d": KL_DIRECTION}[fig]
    second = {"2a": KS_DIRECTION, "2b": KS_DIRECTION,
              "2c": KL_DIRECTION, "2d": KL_DIRECTION}[fig]
    fixed = cp_eigenvectors(first, 0.0, params)
    return fixed, lambda t: cp_eigenvectors(second, t, params)


def cmd_uncertainty(args) -> int:
    fig = getattr(args, "fig", None)
    out = _merged(args, "out", None)
    if fig in ("3a", "3b"):
        return _uncertainty_bipartite_fig(args, fig, out)
    if fig is not None:
        params = {"1a": kaon_defaults(), "1b": stable_defaults()}.get(
            fig, kaon_defaults())
        defaults = {"1a": (0.0, 2.0 * math.pi, 201),
                    "1b": (0.0, 2.0 * math.pi, 201)}.get(fig, (0.0, 8.0, 401))
        grid = list(_grid(args, params, defaults))
        if fig in ("2a", "2b") and params.delta != 0.0:
            # include the exact complementary-time row, where the bound peaks
            grid = sorted(set(grid) | {complementary_time(params)})
        fixed, scan = _uncertainty_pairs(fig, params)
        unit = _out_unit_factor(args, params)
        rows = []
        for t in grid:
            rep = mu_bound(scan(float(t)), fixed)
            rows.append([t * unit, rep.bound, rep.max_overlap,
                         rep.argmax_pair[0], rep.argmax_pair[1]])
        _write_csv(out, ["t", "bound", "max_overlap", "argmax_i", "argmax_j"], rows)
        return 0

    params = _system_params(args)
    if args.obs1 is None or args.obs2 is None:
        raise SystemExit("provide --fig or both --obs1 and --obs2")
    q1, t1 = _parse_obs(args.obs1)
    q2, t2 = _parse_obs(args.obs2)
    scale = _time_scale(args, params)
    t1, t2 = t1 * scale, t2 * scale
    grid = _grid(args, params, (0.0, 6.0, 241))
    unit = _out_unit_factor(args, params)
    scan = args.scan
    rows = []
    for t in grid:
        u1 = t if scan in ("obs1", "both") else t1
        u2 = t if scan in ("obs2", "both") else t2
        rep = mu_bound(spectral(effective_operator(q1, float(u1), params)),
                       spectral(effective_operator(q2, float(u2), params)))
        rows.append([t * unit, rep.bound, rep.max_overlap,
                     rep.argmax_pair[0], rep.argmax_pair[1]])
    _write_csv(_merged(args, "out", None),
               ["t", "bound", "max_overlap", "argmax_i", "argmax_j"], rows)
    return 0


def _uncertainty_bipartite_fig(args, fig: str, out) -> int:
    params = kaon_defaults()
    q = Quasispin(0.5 * math.pi, 0.0)
    grid = _grid(args, params, (0.0, 4.0, 201))
    unit = _out_unit_factor(args, params)
    rows = []
    for t in grid:
        t = float(t)
        pair_t = spectral(effective_operator(q, t, params))
        pair_0 = spectral(effective_operator(q, 0.0, params))
        for j in range(5):
            t1 = 0.25 * j * t
            pair_t1 = spectral(effective_operator(q, t1, params))
            if fig == "3a":
                rep = bipartite_mu_bound(pair_0, pair_t1, pair_t, pair_0)
            else:
                rep = bipartite_mu_bound(pair_0, pair_0, pair_t, pair_t1)
            rows.append([t * unit, t1 * unit, rep.bound, rep.max_overlap,
                         "".join(str(i) for i in rep.argmax_pair)])
    _write_csv(out, ["t", "t1", "bound", "max_overlap", "argmax"], rows)
    return 0


def cmd_times(args) -> int:
    params = _system_params(args)
    if params.gamma_s == params.gamma_l:
        raise SystemExit("characteristic times need distinct widths")
    t_mis = misid_time(params)
    print(f"misid_time_dm={t_mis:.11e}")
    print(f"misid_time_tau_s={t_mis * params.gamma_s:.11e}")
    if params.delta != 0.0:
        t_comp = complementary_time(params)
        d_star = delta_for_equal_times(params)
        print(f"complementary_time_dm={t_comp:.11e}")
        print(f"complementary_time_tau_s={t_comp * params.gamma_s:.11e}")
        print(f"delta_equal_times={d_star:.11e}")
        print(f"delta_ratio={d_star / params.delta:.6g}")
    else:
        print("complementary_time_dm=none (delta=0)")
    return 0


def _parse_quasispins(text: str) -> tuple[Quasispin, ...]:
    parts = text.split(";")
    if len(parts) != 4:
        raise SystemExit("need four quasispins: 'a1,p1;a2,p2;a3,p3;a4,p4'")
    out = []
    for part in parts:
        try:
            alpha, phi = (float(x) for x in part.split(","))
        except ValueError:
            raise SystemExit(f"malformed quasispin: {part!r}")
        out.append(Quasispin(alpha, phi))
    return tuple(out)


def cmd_bell(args) -> int:
    if args.cp_test:
        delta = float(_merged(args, "delta", kaon_defaults().delta))
        report = cp_bell_test(delta)
        print(f"delta={delta:.6g}")
        print(f"s_ks={report.s_ks:.11e} violates={report.variant_ks_violates}")
        print(f"s_kl={report.s_kl:.11e} violates={report.variant_kl_violates}")
        n_viol = int(report.variant_ks_violates) + int(report.variant_kl_violates)
        if n_viol == 1:
            print("result: one variant violates")
        elif n_viol == 0:
            print("result: no violation")
        else:
            print("result: both variants violate (unexpected)")
        return 0

    fig = getattr(args, "fig", None)
    if fig is not None:
        if fig not in _POLICY_FOR_FIG:
            raise SystemExit(f"--fig {fig} is not a bell figure")
        policy = _POLICY_FOR_FIG[fig]
        if fig == "5a":
            gl = kaon_defaults().gamma_l
            params = MesonParams(gamma_s=gl, gamma_l=gl, label="equalwidth")
        elif fig == "5b":
            params = bmeson_defaults()
        else:
            params = kaon_defaults()
    else:
        policy = args.policy
        params = _system_params(args)
    quasispins = _parse_quasispins(args.quasispins) if args.quasispins else \
        (K0BAR_DIRECTION,) * 4
    grid = _grid(args, params, (0.0, 6.0, 601))
    rows = scan_bell(policy, [float(t) for t in grid], params, quasispins)
    unit = _out_unit_factor(args, params)
    table = [[r.t * unit, r.lambda_min, r.lambda_max, r.summand_mu_bound,
              CLASSICAL_BOUND, -CLASSICAL_BOUND, TSIRELSON_BOUND,
              -TSIRELSON_BOUND] for r in rows]
    _write_csv(_merged(args, "out", None),
               ["t", "lambda_min", "lambda_max", "summand_mu_bound",
                "classical_hi", "classical_lo", "tsirelson_hi", "tsirelson_lo"],
               table)
    return 0


def _verify_closed_vs_integrator(params, rng, trials) -> float:
    worst = 0.0
    for _ in range(trials):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z /= np.linalg.norm(z)
        rho = embed_surviving(np.outer(z, z.conj()))
        for t in (0.1, 1.0):
            a = evolve_single_closed(rho, t, params).entries
            b = lindblad_integrate(rho, t, params).entries
            worst = max(worst, float(np.abs(a - b).max()))
    return worst


def _verify_effective_vs_joint(params, rng, trials) -> float:
    psi_m = singlet_state()
    worst = 0.0
    for _ in range(trials):
        q_n = Quasispin(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        q_m = Quasispin(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        t_m = rng.uniform(0.0, 2.0)
        t_n = t_m + rng.uniform(0.0, 2.0)
        jo = joint_probabilities(psi_m, q_n, t_n, q_m, t_m, params)
        surv = psi_m.entries.reshape(4, 4, 4, 4)[:2, :2, :2, :2].reshape(4, 4)
        e_eff = bipartite_expectation(effective_operator(q_n, t_n, params),
                                      effective_operator(q_m, t_m, params), surv)
        worst = max(worst, abs(jo.expectation - e_eff))
    return worst


def _verify_witness_sampling(params, seed) -> float:
    worst = 0.0
    settings = [
        BellSetting(Quasispin(0, 0), 0.0, Quasispin(math.pi / 4, 0), 0.0,
                    Quasispin(math.pi / 2, 0), 0.0,
                    Quasispin(3 * math.pi / 4, 0), 0.0),
        BellSetting(K0BAR_DIRECTION, 0.0, K0BAR_DIRECTION, 1.0,
                    K0BAR_DIRECTION, 1.0, K0BAR_DIRECTION, 0.0),
    ]
    for s in settings:
        bell = bell_operator(s, params)
        lam_max = bell_bounds(s, params).lambda_max
        sampled = sample_witness_max(bell, 10_000, seed=seed, refine_steps=300)
        worst = max(worst, abs(lam_max - sampled))
    return worst


def cmd_verify(args) -> int:
    params = _system_params(args)
    trials = int(_merged(args, "trials", 50))
    if trials < 1:
        raise SystemExit("trials must be >= 1")
    seed = int(_merged(args, "seed", DEFAULT_SEED))
    rng = np.random.default_rng(seed)
    dev_evo = _verify_closed_vs_integrator(params, rng, trials)
    dev_joint = _verify_effective_vs_joint(params, rng, trials)
    dev_bell = _verify_witness_sampling(params, seed)
    print(f"closed_vs_integrator_max_dev={dev_evo:.3e} (tolerance 1e-8)")
    print(f"effective_vs_joint_max_dev={dev_joint:.3e} (tolerance 1e-9)")
    print(f"witness_vs_sampling_max_dev={dev_bell:.3e} (tolerance 1e-8)")
    ok = dev_evo < 1e-8 and dev_joint < 1e-9 and dev_bell < 1e-8
    if args.literal_bipartite_generator:
        plus = np.array([1.0, 1.0, 0.0, 0.0]) / math.sqrt(2.0)
        prod = pure_density(np.kron(plus, plus))
        summed = lindblad_integrate(prod, 1.0, params, summed_generator=True).entries
        factorized = evolve_bipartite(prod, 1.0, params).entries
        breach = float(np.abs(summed - factorized).max())
        print(f"literal_summed_generator_factorization_breach={breach:.3e} "
              "(nonzero by construction: the summed generator couples the decays)")
    print("verify: PASS" if ok else "verify: FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mesonq",
        description="Effective-operator toolkit for decaying two-state systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--system", choices=("kaon", "bmeson", "stable"))
        p.add_argument("--gamma-s", dest="gamma_s", type=float)
        p.add_argument("--gamma-l", dest="gamma_l", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--t-min", dest="t_min", type=float)
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--steps", type=int)
        p.add_argument("--time-unit", dest="time_unit", choices=("dm", "tau_s"))
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--config")

    p = sub.add_parser("constants", help="print system parameters")
    add_common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("uncertainty", help="entropic bound scans")
    add_common(p)
    p.add_argument("--fig", choices=[f for f in FIG_CHOICES if f[0] in "123"])
    p.add_argument("--obs1", help="alpha,phi,t of the first observable")
    p.add_argument("--obs2", help="alpha,phi,t of the second observable")
    p.add_argument("--scan", choices=("obs1", "obs2", "both"), default="obs2")
    p.set_defaults(func=cmd_uncertainty)

    p = sub.add_parser("times", help="characteristic times")
    add_common(p)
    p.set_defaults(func=cmd_times)

    p = sub.add_parser("bell", help="witness eigenvalue scans and CP test")
    add_common(p)
    p.add_argument("--fig", choices=[f for f in FIG_CHOICES if f[0] in "45"])
    p.add_argument("--policy", choices=("all-equal", "alternating-1",
                                        "alternating-2"), default="alternating-1")
    p.add_argument("--quasispins",
                   help="four settings 'a1,p1;a2,p2;a3,p3;a4,p4' (default all K0bar)")
    p.add_argument("--cp-test", dest="cp_test", action="store_true")
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("verify", help="oracle cross-checks")
    add_common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--literal-bipartite-generator", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


_FLOAT_FLAGS = ("--delta", "--gamma-s", "--gamma-l", "--t-min", "--t-max")


def _join_negative_floats(argv: list[str]) -> list[str]:
    """Fold '--delta -3.3e-3' into '--delta=-3.3e-3'.

    argparse only recognizes plain negative decimals as values, not
    scientific notation.
    """
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _FLOAT_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            try:
                float(argv[i + 1])
            except ValueError:
                pass
            else:
                out.append(f"{tok}={argv[i + 1]}")
                i += 2
                continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_join_negative_floats(list(argv)))
    args.config_values = _load_config(getattr(args, "config", None))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
