"""Batch command-line interface.

    qfock <command> --config <path> [--out <path>] [--format json|csv]
          [--threads k] [--seed s] [--force-large] [--dump-grams DIR]

Exit codes: 0 all checks pass (for ``fullness``: the criterion holds),
1 internal error, 2 config parse error, 3 a check failed, 4 precondition or
validation error.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fock as fock_mod
from .errors import GramSingularError, PreconditionError
from .fock import build_fock, gram_fast, gram_naive, q_inner, q_norm
from .fullness import (
    FullnessConfig,
    build_m_maps,
    certify_fullness,
    check_norm_lemmas,
)
from .modular import (
    T_GRID,
    Monomial,
    centralizer_residual,
    kms_residual,
    modular_conjugation,
    modular_flow,
    realize_stable,
    stable_monomials,
    tomita_residual,
    vacuum_level_mass,
    word_eigenvalues,
    flow_residual,
)
from .moments import crossing_polynomial, moment_pairing_formula
from .operators import (
    adjoint_q,
    annihilation_left,
    annihilation_right,
    creation_left,
    creation_right,
    identity,
    operator_norm_q,
    spectral_norm,
    vacuum_state,
    wick,
    wick_right,
    wick_word,
)
from .representation import (
    RepresentationSpec,
    apply_I,
    apply_U,
    build_eigenvector_family,
    build_representation,
    j_map,
)

COMMANDS = ("gram", "norms", "modular", "moments", "centralizer", "fullness", "all")
EXIT_OK, EXIT_INTERNAL, EXIT_PARSE, EXIT_CHECK, EXIT_PRECONDITION = 0, 1, 2, 3, 4
MAX_LEVEL = 8

_KEYS = {
    "command", "q", "N", "representation", "C", "d", "constants_mode", "q_grid",
    "t_grid", "max_degree", "max_order", "draws", "seed", "threads", "compute_gap",
    "check_lemmas",
}


class ConfigParseError(Exception):
    pass


class ConfigValidationError(PreconditionError):
    pass


@dataclass
class RunConfig:
    command: str
    q: float
    N: int
    representation: RepresentationSpec
    C: float | None = None
    d: int | None = None
    constants: tuple | None = None
    q_grid: tuple = ()
    t_grid: tuple = T_GRID
    max_degree: int = 2
    max_order: int = 6
    draws: int = 20
    seed: int = 0
    threads: int = 1
    compute_gap: bool = True
    check_lemmas: bool | None = None
    force_large: bool = False

    def echo(self) -> dict:
        return {
            "command": self.command,
            "q": self.q,
            "N": self.N,
            "representation": {
                "fixed_dim": self.representation.fixed_dim,
                "blocks": [{"lambda": lam, "count": c} for lam, c in self.representation.blocks],
            },
            "C": self.C,
            "d": self.d,
            "constants_mode": {"user": list(self.constants)} if self.constants else "estimate",
            "q_grid": list(self.q_grid),
            "t_grid": list(self.t_grid),
            "max_degree": self.max_degree,
            "max_order": self.max_order,
            "draws": self.draws,
            "seed": self.seed,
            "threads": self.threads,
            "compute_gap": self.compute_gap,
            "check_lemmas": self.check_lemmas,
            "force_large": self.force_large,
        }


def _number(obj, key, kind=float, required=False, default=None):
    if key not in obj:
        if required:
            raise ConfigValidationError(f"missing required key {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigValidationError(f"{key!r} must be a number")
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigValidationError(f"{key!r} must be an integer")
        return int(v)
    return float(v)


def _check_q(q, key="q"):
    if not -1.0 < q < 1.0:
        raise ConfigValidationError(f"{key} must lie in (-1,1) (operators are unbounded at q=1)")


def parse_config(text: str, command: str | None = None, force_large: bool = False) -> RunConfig:
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigParseError("config must be a JSON object")
    unknown = sorted(set(obj) - _KEYS)
    if unknown:
        raise ConfigValidationError(f"unknown config keys: {', '.join(unknown)}")

    cmd = obj.get("command", command)
    if command is not None and cmd != command:
        raise ConfigValidationError(f"config command {cmd!r} does not match {command!r}")
    if cmd not in COMMANDS:
        raise ConfigValidationError(f"command must be one of {', '.join(COMMANDS)}")

    q = _number(obj, "q", required=True)
    _check_q(q)
    N = _number(obj, "N", int, required=True)
    if N < 1:
        raise ConfigValidationError("N must be >= 1")

    rep_obj = obj.get("representation", {"fixed_dim": 1})
    if not isinstance(rep_obj, dict):
        raise ConfigValidationError("representation must be an object")
    extra = sorted(set(rep_obj) - {"fixed_dim", "blocks"})
    if extra:
        raise ConfigValidationError(f"unknown representation keys: {', '.join(extra)}")
    fixed_dim = _number(rep_obj, "fixed_dim", int, default=0)
    if fixed_dim < 0:
        raise ConfigValidationError("fixed_dim must be nonnegative")
    blocks = []
    for b in rep_obj.get("blocks", []):
        if not isinstance(b, dict) or set(b) - {"lambda", "count"}:
            raise ConfigValidationError("each block must be {\"lambda\": x, \"count\": k}")
        lam = _number(b, "lambda", required=True)
        count = _number(b, "count", int, default=1)
        if not lam > 1:
            raise ConfigValidationError(f"block lambda must exceed 1, got {lam}")
        if count < 1:
            raise ConfigValidationError("block count must be positive")
        blocks.append((lam, count))
    spec = RepresentationSpec(q, fixed_dim, tuple(blocks))
    if spec.dim < 1:
        raise ConfigValidationError("representation must have dimension >= 1")

    if not force_large:
        if N > MAX_LEVEL:
            raise ConfigValidationError(f"N={N} exceeds {MAX_LEVEL}; pass --force-large to override")
        if spec.dim ** N > fock_mod.MAX_WORDS:
            raise ConfigValidationError(
                f"dim_H^N = {spec.dim ** N} exceeds {fock_mod.MAX_WORDS}; pass --force-large"
            )

    C = _number(obj, "C")
    d = _number(obj, "d", int)
    if C is not None and C < 1:
        raise ConfigValidationError("C must be >= 1")
    if d is not None and d < 1:
        raise ConfigValidationError("d must be >= 1")
    constants = None
    cm = obj.get("constants_mode", "estimate")
    if cm != "estimate":
        if not isinstance(cm, dict) or set(cm) != {"user"} or not isinstance(cm["user"], list) \
                or len(cm["user"]) != 2:
            raise ConfigValidationError('constants_mode must be "estimate" or {"user": [C1, C2]}')
        constants = tuple(_number({"c": c}, "c") for c in cm["user"])
        if min(constants) <= 0:
            raise ConfigValidationError("user constants must be positive")
    if cmd == "fullness" and (C is None or d is None):
        raise ConfigValidationError("fullness requires C and d")

    q_grid = tuple(_number({"q": v}, "q") for v in obj.get("q_grid", [q]))
    for v in q_grid:
        _check_q(v, "q_grid entries")
    t_grid = tuple(_number({"t": v}, "t") for v in obj.get("t_grid", list(T_GRID)))
    max_degree = _number(obj, "max_degree", int, default=2)
    if not 0 <= max_degree <= 8:
        raise ConfigValidationError("max_degree must lie in 0..8")
    max_order = _number(obj, "max_order", int, default=6)
    if not 1 <= max_order <= 16:
        raise ConfigValidationError("max_order must lie in 1..16")
    draws = _number(obj, "draws", int, default=20)
    if draws < 1:
        raise ConfigValidationError("draws must be >= 1")
    for key in ("compute_gap", "check_lemmas"):
        if key in obj and not isinstance(obj[key], bool):
            raise ConfigValidationError(f"{key!r} must be a boolean")
    return RunConfig(
        command=cmd, q=q, N=N, representation=spec, C=C, d=d, constants=constants,
        q_grid=q_grid, t_grid=t_grid, max_degree=max_degree, max_order=max_order,
        draws=draws, seed=_number(obj, "seed", int, default=0),
        threads=_number(obj, "threads", int, default=1),
        compute_gap=obj.get("compute_gap", True), check_lemmas=obj.get("check_lemmas"),
        force_large=force_large,
    )


def _num(x):
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    return x


@dataclass
class Report:
    command: str
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    def check(self, name, value, bound, tolerance, relation="<="):
        value, bound = float(value), float(bound)
        if relation == "<=":
            ok = value <= bound + tolerance
        elif relation == ">=":
            ok = value >= bound - tolerance
        elif relation == ">":
            ok = value > bound + tolerance
        elif relation == "==":
            ok = abs(value - bound) <= tolerance
        else:
            raise ValueError(relation)
        self.checks.append({
            "name": name, "value": _num(value), "bound": _num(bound),
            "tolerance": tolerance, "relation": relation, "pass": bool(ok),
        })
        return ok

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.checks)


class _Timer:
    def __init__(self, report: Report, phase: str):
        self.report, self.phase = report, phase

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timing[self.phase] = self.report.timing.get(self.phase, 0.0) + \
            time.perf_counter() - self.t0


def _rand_vec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def _suite_gram(cfg: RunConfig, rep, rep_report: Report, dump_dir=None):
    table = []
    for q in cfg.q_grid:
        try:
            F = build_fock(rep.dim_H, q, cfg.N, max_words=math.inf if cfg.force_large else fock_mod.MAX_WORDS)
        except GramSingularError as exc:
            rep_report.check(f"gram_min_eig[q={q},n={exc.level}]", exc.min_eigenvalue,
                             fock_mod.SINGULAR_TOL, 0.0, ">=")
            continue
        for n, lo in enumerate(F.min_eigenvalues):
            table.append({"q": q, "level": n, "min_eigenvalue": lo})
            rep_report.check(f"gram_min_eig[q={q},n={n}]", lo, 0.0, 0.0, ">")
            if n <= 6 and rep.dim_H ** n <= 4096:
                diff = np.abs(gram_naive(rep.dim_H, n, q) - F.gram(n)).max()
                rep_report.check(f"gram_fast_vs_naive[q={q},n={n}]", diff, 0.0, 1e-12)
            if dump_dir is not None:
                _dump_gram(dump_dir, q, n, F.gram(n))
    rep_report.results["gram_min_eigenvalues"] = table


def _dump_gram(dump_dir, q, n, G):
    dump_dir = Path(dump_dir)
    dump_dir.mkdir(parents=True, exist_ok=True)
    stem = f"gram_q{q:+.6f}_n{n}"
    np.ascontiguousarray(G, dtype="<f8").tofile(dump_dir / f"{stem}.bin")
    index_path = dump_dir / "index.json"
    index = json.loads(index_path.read_text()) if index_path.exists() else []
    index = [e for e in index if e["file"] != f"{stem}.bin"]
    index.append({"file": f"{stem}.bin", "q": q, "level": n, "shape": list(G.shape),
                  "dtype": "<f8", "order": "C"})
    index_path.write_text(json.dumps(sorted(index, key=lambda e: e["file"]), indent=1))


def _suite_norms(cfg, rep, F, report, rng):
    q = F.q
    law = 1.0 / math.sqrt(1.0 - q) if q >= 0 else 1.0
    for k in range(rep.dim_H):
        e = rep.basis_vector(k)
        for name, op in (("l", creation_left), ("r", creation_right)):
            val = operator_norm_q(F, op(F, rep, e))
            if q <= 0:
                report.check(f"norm_{name}(e{k})", val, 1.0, 1e-10, "==")
            else:
                report.check(f"norm_{name}(e{k})", val, law, 1e-10, "<=")
    adj = com = qcr = 0.0
    inner = F.offsets[F.N]       # levels <= N-1
    inner2 = F.offsets[F.N - 1] if F.N >= 2 else 0
    for _ in range(cfg.draws):
        xi, eta = _rand_vec(rng, rep.dim_H), _rand_vec(rng, rep.dim_H)
        for cre, ann in ((creation_left, annihilation_left), (creation_right, annihilation_right)):
            diff = (adjoint_q(cre(F, rep, xi)) - ann(F, rep, xi)).orthonormal()
            adj = max(adj, spectral_norm(diff))
        rel = annihilation_left(F, rep, xi) @ creation_left(F, rep, eta) \
            - q * (creation_left(F, rep, eta) @ annihilation_left(F, rep, xi)) \
            - np.vdot(xi, eta) * identity(F)
        qcr = max(qcr, spectral_norm(rel.orthonormal()[:, :inner]))
        if inner2:
            c = wick(F, rep, xi) @ wick_right(F, rep, apply_I(rep, eta))
            c = c - wick_right(F, rep, apply_I(rep, eta)) @ wick(F, rep, xi)
            com = max(com, spectral_norm(c.orthonormal()[:, :inner2]))
    report.check("adjoint_coherence", adj, 0.0, 1e-10)
    report.check("q_commutation_relation", qcr, 0.0, 1e-10)
    if inner2:
        report.check("left_right_commutation", com, 0.0, 1e-8)
    sa = 0.0
    for _ in range(cfg.draws):
        h = _rand_vec(rng, rep.dim_H)
        h = 0.5 * (h + apply_I(rep, h))
        w = wick(F, rep, j_map(rep, h))
        sa = max(sa, spectral_norm((w - adjoint_q(w)).orthonormal()))
    report.check("wick_selfadjoint_on_K_R", sa, 0.0, 1e-10)


def _suite_modular(cfg, rep, F, report, rng):
    J = modular_conjugation(F, rep)
    v = _rand_vec(rng, F.total_dim)
    report.check("J_squared", np.abs(J(J(v)) - v).max(), 0.0, 1e-12)
    wdiag = word_eigenvalues(F, rep)
    report.check("J_Delta_J_inverse", np.abs(wdiag[J.perm] * wdiag - 1).max(), 0.0, 1e-12)
    tom = flow = 0.0
    for length in range(1, min(3, F.N) + 1):
        for _ in range(cfg.draws):
            letters = [_rand_vec(rng, rep.dim_H) for _ in range(length)]
            x = wick_word(F, rep, *letters)
            tom = max(tom, tomita_residual(F, rep, x))
            for t in cfg.t_grid:
                y = wick_word(F, rep, *[apply_U(rep, -t, l) for l in letters])
                flow = max(flow, flow_residual(F, modular_flow(F, rep, t, x), y))
    report.check("tomita", tom, 0.0, 1e-8)
    report.check("flow_vs_letterwise_rotation", flow, 0.0, 1e-8)
    if F.N >= 3:
        kms = 0.0
        basis = [rep.basis_vector(k) for k in range(rep.dim_H)]
        for a, b in itertools.product(basis, repeat=2):
            kms = max(kms, kms_residual(F, rep, wick(F, rep, a), wick(F, rep, b)))
        report.check("kms_eigen_letters", kms, 0.0, 1e-8)


def _suite_moments(cfg, rep, F, report, rng):
    q = F.q
    e = rep.basis_vector(0)
    w = wick(F, rep, e)
    table = []
    power = identity(F)
    for order in range(1, min(cfg.max_order, 2 * F.N + 1) + 1):
        power = power @ w
        fockv = vacuum_state(F, power)
        oracle = moment_pairing_formula(rep, q, *([e] * order)) if order % 2 == 0 else 0j
        diff = abs(fockv - oracle)
        table.append({"order": order, "moment": oracle.real, "fock": fockv.real,
                      "abs_diff": diff, "tolerance": 1e-10, "pass": diff <= 1e-10})
        report.check(f"moment_{order}", diff, 0.0, 1e-10)
    report.tables["moments"] = table
    report.results["crossing_polynomials"] = {
        str(n): crossing_polynomial(n) for n in range(1, min(cfg.max_order // 2, 6) + 1)}
    worst = 0.0
    basis = [rep.basis_vector(k) for k in range(rep.dim_H)]
    for _ in range(cfg.draws):
        m = int(rng.choice([2, 4, 6]))
        if m > 2 * F.N + 1:
            continue
        letters = [basis[int(i)] for i in rng.integers(0, rep.dim_H, size=m)]
        x = identity(F)
        for l in letters:
            x = x @ wick(F, rep, l)
        worst = max(worst, abs(vacuum_state(F, x) - moment_pairing_formula(rep, q, *letters)))
    report.check("mixed_moments_oracle_vs_fock", worst, 0.0, 1e-10)


def _generators(rep):
    """(lambda, unit eigenvector) for each fixed vector and each block's lambda>1 vector."""
    out = []
    for k in range(rep.dim_H):
        if rep.a_eigenvalues[k] >= 1.0 and (
                rep.conjugation_pairing[k] == k or rep.conjugation_pairing[k] > k):
            out.append((float(rep.a_eigenvalues[k]), rep.basis_vector(k)))
    return out


def _suite_centralizer(cfg, rep, F, report, rng):
    gens = _generators(rep)[:3]
    lambdas = tuple(lam for lam, _ in gens)
    xis = [x for _, x in gens]
    monos = stable_monomials(lambdas, cfg.max_degree)
    report.results["stable_monomials"] = [str(m) for m in monos]
    report.results["lambdas"] = list(lambdas)
    flow = 0.0
    ops = []
    masses = {}
    for m in monos:
        p = realize_stable(F, rep, m, xis)
        ops.append((m, p))
        flow = max(flow, centralizer_residual(F, rep, p, cfg.t_grid))
        masses[str(m)] = [vacuum_level_mass(F, p, n) for n in range(F.N + 1)]
    report.results["vacuum_level_mass"] = masses
    report.check("centralizer_flow_invariance", flow, 0.0, 1e-8)
    pairs = [(a, b) for a, b in itertools.combinations(ops, 2)
             if a[0].degree + b[0].degree <= 2 * F.N + 1]
    if len(pairs) > cfg.draws:
        idx = rng.choice(len(pairs), size=cfg.draws, replace=False)
        pairs = [pairs[i] for i in sorted(idx)]
    tr = 0.0
    for (_, a), (_, b) in pairs:
        tr = max(tr, abs(vacuum_state(F, a @ b) - vacuum_state(F, b @ a)))
    report.check("centralizer_trace_property", tr, 0.0, 1e-8)
    # spanning dimension of stable vectors vs weight-one words (reported only)
    top = min(cfg.max_degree, F.N)
    cut = F.offsets[top + 1]
    vecs = np.array([F.orthonormal(p.apply(F.vacuum()))[:cut] for _, p in ops])
    rank = int(np.linalg.matrix_rank(vecs, tol=1e-8)) if len(vecs) else 0
    kernel = int(np.sum(np.abs(np.log(word_eigenvalues(F, rep)[:cut])) < 1e-12))
    report.results["stable_span"] = {"rank": rank, "weight_one_words": kernel, "levels": top}


def _suite_fullness(cfg, rep, report):
    cert = certify_fullness(FullnessConfig(
        cfg.representation, cfg.C, cfg.d, cfg.N, cfg.constants, cfg.compute_gap))
    report.results["certificate"] = {k: _num(v) if not isinstance(v, tuple) else list(v)
                                     for k, v in cert.to_dict().items()}
    report.check("fullness_inequality", cert.lhs, cert.rhs, 0.0, ">")
    if cert.spectral_gap is not None:
        report.check("spectral_gap_positive", cert.spectral_gap, 0.0, 0.0, ">")
        if cert.inequality_holds and cert.proof_bound > 0:
            report.check("spectral_gap_vs_proof_bound", cert.spectral_gap,
                         cert.proof_bound, 1e-8, ">=")
    lemmas = cfg.check_lemmas
    if lemmas is None:
        lemmas = rep.dim_H * rep.dim_H ** cfg.N <= 4000
    if lemmas:
        F = build_fock(rep.dim_H, rep.q, cfg.N)
        fam = build_eigenvector_family(rep, cfg.C, cfg.d)
        lr = check_norm_lemmas(build_m_maps(F, rep, fam), cfg.C, cert.C1_used, cert.C2_used)
        for k, v in lr.values.items():
            rel = ">=" if k.startswith(("sigma_min", "lambda_min")) else "<="
            report.check(f"lemma:{k}", v, lr.bounds[k], lr.tolerance, rel)
        report.results["lemma_info"] = {k: _num(v) for k, v in lr.info.items()}
    return cert


def run(cfg: RunConfig, dump_dir=None) -> tuple[dict, int]:
    from threadpoolctl import threadpool_limits

    report = Report(cfg.command)
    rng = np.random.default_rng(cfg.seed)
    code = EXIT_OK
    with threadpool_limits(limits=cfg.threads):
        rep = build_representation(cfg.representation)
        cmds = [cfg.command] if cfg.command != "all" else \
            ["gram", "norms", "modular", "moments", "centralizer"] + \
            (["fullness"] if cfg.C is not None and cfg.d is not None else [])
        F = None
        for cmd in cmds:
            if cmd == "gram":
                with _Timer(report, "gram"):
                    _suite_gram(cfg, rep, report, dump_dir)
                continue
            if cmd == "fullness":
                with _Timer(report, "fullness"):
                    _suite_fullness(cfg, rep, report)
                continue
            if F is None:
                with _Timer(report, "build_fock"):
                    F = build_fock(rep.dim_H, cfg.q, cfg.N,
                                   max_words=math.inf if cfg.force_large else fock_mod.MAX_WORDS)
            with _Timer(report, cmd):
                {"norms": _suite_norms, "modular": _suite_modular, "moments": _suite_moments,
                 "centralizer": _suite_centralizer}[cmd](cfg, rep, F, report, rng)
    if not report.ok:
        code = EXIT_CHECK
    out = {
        "command": cfg.command,
        "inputs": cfg.echo(),
        "seed": cfg.seed,
        "threads": cfg.threads,
        "checks": report.checks,
        "results": _jsonable(report.results),
        "tables": _jsonable(report.tables),
        "summary": {"passed": sum(c["pass"] for c in report.checks),
                    "failed": sum(not c["pass"] for c in report.checks),
                    "exit_code": code},
        "timing": {k: round(v, 6) for k, v in sorted(report.timing.items())},
    }
    return out, code


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return _num(obj)


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report["command"] == "moments" and report["tables"].get("moments"):
        w.writerow(["order", "moment", "fock", "abs_diff", "tolerance", "pass"])
        for row in report["tables"]["moments"]:
            w.writerow([row["order"], _fmt(row["moment"]), _fmt(row["fock"]),
                        _fmt(row["abs_diff"]), row["tolerance"], row["pass"]])
        return buf.getvalue()
    w.writerow(["name", "value", "bound", "tolerance", "pass"])
    for c in report["checks"]:
        w.writerow([c["name"], _fmt(c["value"]), _fmt(c["bound"]), c["tolerance"], c["pass"]])
    return buf.getvalue()


def _fmt(x):
    return repr(x) if isinstance(x, float) else x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfock", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON config file ('-' for stdin)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, help="BLAS thread count (overrides config)")
    p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    p.add_argument("--force-large", action="store_true",
                   help=f"allow N > {MAX_LEVEL} or more than {fock_mod.MAX_WORDS} words per level")
    p.add_argument("--dump-grams", metavar="DIR",
                   help="write Gram matrices as little-endian float64 row-major .bin files")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = sys.stdin.read() if args.config == "-" else Path(args.config).read_text("utf-8")
        cfg = parse_config(text, args.command, force_large=args.force_large)
        if args.threads is not None:
            cfg.threads = args.threads
        if args.seed is not None:
            cfg.seed = args.seed
        report, code = run(cfg, dump_dir=args.dump_grams)
    except (ConfigParseError, OSError, UnicodeDecodeError) as exc:
        print(f"qfock: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"qfock: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Exception as exc:  # noqa: BLE001
        print(f"qfock: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    text = to_json(report) if args.format == "json" else to_csv(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
