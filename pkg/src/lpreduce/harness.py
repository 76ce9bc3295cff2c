"""Instance files, generators and the experiment runner behind the command line."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import Basis, CvpInstance, PNorm
from .errors import DegenerateAfterRetries, LatticeError
from .oracles import (
    AdversarialCVP,
    AdversarialSVP,
    BDDOracle,
    ExactCVP,
    ExactSVP,
    UniqueSVP,
    distance_key,
    lambda1,
    lambda1_key,
)
from .reductions import (
    ReductionParams,
    error_value,
    exact_dss_factory,
    gamma_bdd_to_usvp,
    gamma_cvp_to_bdd,
    gamma_cvp_to_cvp,
    gamma_cvp_to_usvp,
    gamma_svp_to_svp,
    reduce_bdd_q_to_usvp_p,
    reduce_cvp_p_to_cvp_q,
    reduce_cvp_q_to_usvp_p,
    reduce_cvp_to_bdd,
    reduce_cvp_to_dss,
    reduce_cvp_to_svp_supergaussian,
    reduce_svp_q_to_svp_p,
)

INSTANCE_VERSION = "lpreduce-instance/1"
REPORT_VERSION = "lpreduce-report/1"
CSV_COLUMNS = ("instance_id", "reduction", "eps", "gamma_bound", "achieved", "referee", "pass")
TIMING_FIELDS = ("timestamp", "wall_time")


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------


def fraction_to_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def str_to_fraction(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise ValueError(f"rationals must be 'num/den' strings, got {s!r}")
    return Fraction(s)


@dataclass(frozen=True)
class InstanceFile:
    """A basis (integer columns over a shared denominator), optional target, norm and metadata."""

    basis: Basis
    norm: str = "2"
    target: tuple[Fraction, ...] | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        d = self.basis.denominator
        cols = [[int(x * d) for x in col] for col in self.basis.columns]
        out = {
            "version": INSTANCE_VERSION,
            "basis": {"columns": cols, "denominator": d},
            "norm": self.norm,
            "metadata": dict(self.metadata),
        }
        if self.target is not None:
            out["target"] = [fraction_to_str(x) for x in self.target]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> "InstanceFile":
        if obj.get("version") != INSTANCE_VERSION:
            raise ValueError(f"unsupported instance version {obj.get('version')!r}")
        b = obj["basis"]
        den = int(b.get("denominator", 1))
        cols = [[Fraction(int(x), den) for x in col] for col in b["columns"]]
        basis = Basis.from_columns(cols)
        norm = str(obj.get("norm", "2"))
        PNorm.parse(norm)
        target = obj.get("target")
        if target is not None:
            target = tuple(str_to_fraction(x) for x in target)
            if len(target) != basis.m:
                raise ValueError("target length must equal the ambient dimension")
        return cls(basis, norm, target, dict(obj.get("metadata", {})))

    @classmethod
    def loads(cls, text: str) -> "InstanceFile":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path) -> "InstanceFile":
        return cls.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _pad(cols: list[list[int]], m: int) -> list[list[int]]:
    return [col + [0] * (m - len(col)) for col in cols]


def gen_lattice(
    kind: str,
    n: int,
    m: int | None = None,
    bound: int = 5,
    seed=0,
    *,
    gap: int = 5,
    q: int = 7,
    k: int | None = None,
    max_retries: int = 100,
) -> Basis:
    """A random basis of rank n in dimension m (default n).

    ``uniform``: entries uniform in ``[-bound, bound]``, resampled until full
    rank. ``qary``: columns of ``[[I_k, A], [0, q I_{n-k}]]`` with A uniform
    mod q. ``diagonal-gap``: ``diag(1, gap, ..., gap)``.
    """
    m = n if m is None else m
    if not 1 <= n <= m <= 8:
        raise ValueError("need 1 <= n <= m <= 8")
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        for _ in range(max_retries):
            E = rng.integers(-bound, bound + 1, size=(m, n))
            if np.linalg.matrix_rank(E) == n:
                try:
                    return Basis.from_columns(E.T.tolist())
                except LatticeError:
                    continue
        raise DegenerateAfterRetries(f"no full-rank basis after {max_retries} draws")
    if kind == "qary":
        k = n // 2 if k is None else k
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        A = rng.integers(0, q, size=(k, n - k))
        cols = []
        for j in range(n):
            col = [0] * n
            if j < k:
                col[j] = 1
            else:
                for i in range(k):
                    col[i] = int(A[i, j - k])
                col[j] = q
            cols.append(col)
        return Basis.from_columns(_pad(cols, m))
    if kind == "diagonal-gap":
        diag = [1] + [gap] * (n - 1)
        cols = [[diag[j] if i == j else 0 for i in range(n)] for j in range(n)]
        return Basis.from_columns(_pad(cols, m))
    raise ValueError(f"unknown lattice kind {kind!r}")


def gen_target(basis: Basis, rng: np.random.Generator, den: int = 8) -> tuple[Fraction, ...]:
    """``B u`` for u uniform on a ``1/den`` grid of ``[0, 1)^n``."""
    u = [Fraction(int(x), den) for x in rng.integers(0, den, size=basis.n)]
    cols = basis.columns
    return tuple(sum((u[j] * cols[j][i] for j in range(basis.n)), Fraction(0)) for i in range(basis.m))


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

REDUCTIONS = (
    "svp_q_to_svp_p",
    "cvp_to_bdd",
    "bdd_q_to_usvp_p",
    "cvp_q_to_usvp_p",
    "cvp_p_to_cvp_q",
    "cvp_to_dss",
    "cvp_to_svp_supergaussian",
)
EMBEDDING_REDUCTIONS = {"bdd_q_to_usvp_p", "cvp_q_to_usvp_p", "cvp_to_dss", "cvp_to_svp_supergaussian"}


@dataclass
class ExperimentConfig:
    """Everything that determines a run; identical configs give identical reports."""

    reduction: str
    p: str = "2"
    q: str = "2"
    backend: str = "exact"  # exact | adversarial | strict
    oracle_gamma: float = 1.0
    gamma: float = 4.0  # target factor of the supergaussian reductions
    eps: float = 0.5
    delta: float | None = None
    tau: float = 1.0
    Q_override: int | None = None
    max_trials: int = 50
    M: int | str = 1000  # "full" asks for the prescribed sample count
    f: int = 10
    stop_factor: float | None = None
    coset_q_factor: float = 100.0
    inner_max_trials: int = 20
    kind: str = "uniform"
    rank: int = 4
    dim: int | None = None
    bound: int = 5
    gap: int = 5
    count: int = 10
    target_den: int = 8
    bdd_promise: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.reduction not in REDUCTIONS:
            raise ValueError(f"unknown reduction {self.reduction!r}")
        if self.backend not in ("exact", "adversarial", "strict"):
            raise ValueError(f"unknown backend {self.backend!r}")
        self.p, self.q = str(self.p), str(self.q)
        PNorm.parse(self.p)
        PNorm.parse(self.q)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**obj)

    def to_dict(self) -> dict:
        return asdict(self)

    def params(self) -> ReductionParams:
        return ReductionParams(
            eps=self.eps,
            delta=self.delta,
            gamma_oracle=self.oracle_gamma,
            tau=self.tau,
            alpha_bdd=1 + self.tau,
            Q_override=self.Q_override,
            max_trials=self.max_trials,
            M=self.M if self.M != "full" else 1000,
            f=self.f,
            stop_factor=self.stop_factor,
            coset_q_factor=self.coset_q_factor,
        )


def instance_rng(seed: int, index: int, stream: int) -> np.random.Generator:
    """Counter-derived substream ``(seed, instance index, stream)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index, stream)))


def _instance_norm(cfg: ExperimentConfig) -> str:
    # The instance is posed in the norm the reduction solves.
    return cfg.p if cfg.reduction in ("cvp_to_bdd", "cvp_p_to_cvp_q", "cvp_to_dss", "cvp_to_svp_supergaussian") else cfg.q


def make_ensemble_instance(cfg: ExperimentConfig, index: int) -> InstanceFile:
    rng = instance_rng(cfg.seed, index, 0)
    basis = gen_lattice(cfg.kind, cfg.rank, cfg.dim, cfg.bound, rng, gap=cfg.gap)
    norm = _instance_norm(cfg)
    meta = {"seed": cfg.seed, "index": index, "kind": cfg.kind}
    if cfg.reduction == "svp_q_to_svp_p":
        return InstanceFile(basis, norm, None, meta)
    target = gen_target(basis, rng, cfg.target_den)
    if cfg.bdd_promise is not None:
        pn = PNorm.parse(norm)
        l1 = lambda1_key(basis, pn)
        bound = pn.scale_key(l1, cfg.bdd_promise)
        for _ in range(1000):
            dk = distance_key(CvpInstance(basis, target, pn))
            if pn.key_le(dk, bound) and not pn.keys_tied(dk, bound):
                break
            target = gen_target(basis, rng, cfg.target_den)
        else:
            raise DegenerateAfterRetries("no target within the promise")
    return InstanceFile(basis, norm, target, meta)


def _svp_oracle(cfg: ExperimentConfig, rng):
    if cfg.backend == "adversarial":
        return AdversarialSVP(cfg.oracle_gamma, rng)
    return ExactSVP()


def _sample_count(cfg: ExperimentConfig):
    return "full" if cfg.M == "full" else None


def run_reduction(cfg: ExperimentConfig, inst: InstanceFile, index: int = 0) -> dict:
    """Run the configured reduction on one instance and audit it against the referee."""
    rng = instance_rng(cfg.seed, index, 1)
    orng = instance_rng(cfg.seed, index, 2)
    params = cfg.params()
    B = inst.basis
    p, q = PNorm.parse(cfg.p), PNorm.parse(cfg.q)
    strict = cfg.backend == "strict"
    name = cfg.reduction
    norm = PNorm.parse(inst.norm)
    cinst = None if inst.target is None else CvpInstance(B, inst.target, norm)
    if name == "svp_q_to_svp_p":
        res = reduce_svp_q_to_svp_p(B, p, q, _svp_oracle(cfg, orng), rng, params)
        bound = gamma_svp_to_svp(cfg.eps, p, cfg.oracle_gamma)
    elif name == "cvp_to_bdd":
        oracle = BDDOracle(1 + cfg.tau, cfg.oracle_gamma, strict)
        res = reduce_cvp_to_bdd(cinst, oracle, rng, params)
        bound = gamma_cvp_to_bdd(cfg.tau, cfg.oracle_gamma)
    elif name == "bdd_q_to_usvp_p":
        oracle = UniqueSVP(params.usvp_gamma(), strict)
        res = reduce_bdd_q_to_usvp_p(cinst, p, oracle, rng, params)
        bound = gamma_bdd_to_usvp(cfg.eps, p, q)
    elif name == "cvp_q_to_usvp_p":
        oracle = UniqueSVP(params.usvp_gamma(), strict)
        inner = cfg.params()
        inner.max_trials = cfg.inner_max_trials
        # Each inner BDD call may stop once it meets its own guarantee.
        inner.stop_factor = None if cfg.stop_factor is None else gamma_bdd_to_usvp(cfg.eps, p, q)
        res = reduce_cvp_q_to_usvp_p(cinst, p, oracle, rng, params, inner)
        bound = gamma_cvp_to_usvp(cfg.eps, p, q)
    elif name == "cvp_p_to_cvp_q":
        oracle = AdversarialCVP(cfg.oracle_gamma, orng) if cfg.backend == "adversarial" else ExactCVP()
        res = reduce_cvp_p_to_cvp_q(cinst, q, oracle, rng, params)
        bound = gamma_cvp_to_cvp(cfg.eps, p, cfg.oracle_gamma)
    elif name == "cvp_to_dss":
        res = reduce_cvp_to_dss(cinst, cfg.gamma, exact_dss_factory(), rng, params, M=_sample_count(cfg))
        bound = cfg.gamma
    else:
        res = reduce_cvp_to_svp_supergaussian(cinst, cfg.gamma, ExactSVP(), rng, params, M=_sample_count(cfg))
        bound = cfg.gamma
    v = res.vector
    if cinst is None:
        referee = lambda1(B, q)
        achieved = v.norm(q) / referee
    else:
        referee = norm.key_to_value(distance_key(cinst))
        err = error_value(v, cinst.target, norm)
        achieved = err / referee if referee > 0 else (0.0 if err == 0 else None)
    member = v.basis == B and B.contains(v.embedding)
    shapes = sorted(tuple(s) for s in res.stats.shapes)
    if name in EMBEDDING_REDUCTIONS:
        shapes_ok = all(s == (B.n + 1, B.m + 1) for s in shapes)
    elif name == "svp_q_to_svp_p":
        shapes_ok = res.stats.sublattice_only and all(s == (B.n, B.m) for s in shapes)
    else:
        shapes_ok = all(s == (B.n, B.m) for s in shapes)
    bound_ok = achieved is not None and achieved <= bound * (1 + 1e-12)
    return {
        "achieved": achieved,
        "referee": referee,
        "gamma_bound": bound,
        "pass": bool(bound_ok and member and shapes_ok),
        "bound_ok": bool(bound_ok),
        "member": bool(member),
        "shapes_ok": bool(shapes_ok),
        "sublattice_only": bool(res.stats.sublattice_only),
        "trials": res.trials,
        "successes": res.successes,
        "oracle": res.stats.as_dict(),
        "coeffs": list(v.coeffs),
        "info": _jsonable(res.info),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return fraction_to_str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def run_experiment(cfg: ExperimentConfig, instances: list[InstanceFile] | None = None) -> dict:
    """Run the reduction on every ensemble instance (or the given ones) and aggregate.

    Errors are recorded per instance and never abort the batch.
    """
    records = []
    insts = instances
    total = len(insts) if insts is not None else cfg.count
    for i in range(total):
        t0 = time.perf_counter()
        rec = {"instance_id": i, "reduction": cfg.reduction, "eps": cfg.eps}
        try:
            inst = insts[i] if insts is not None else make_ensemble_instance(cfg, i)
            rec.update(run_reduction(cfg, inst, i))
        except (LatticeError, ValueError) as exc:
            rec.update({"pass": False, "error": f"{type(exc).__name__}: {exc}", "gamma_bound": None, "achieved": None, "referee": None})
        rec["wall_time"] = time.perf_counter() - t0
        records.append(rec)
    passed = sum(1 for r in records if r["pass"])
    report = {
        "version": REPORT_VERSION,
        "config": cfg.to_dict(),
        "records": records,
        "summary": {
            "count": len(records),
            "passed": passed,
            "pass_rate": passed / len(records) if records else 1.0,
            "errors": sum(1 for r in records if "error" in r),
        },
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    report["digest"] = report_digest(report)
    return report


def strip_timing(obj):
    """A copy with timestamp and wall-time fields removed."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_FIELDS and k != "digest"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def report_digest(report: dict) -> str:
    return hashlib.sha256(canonical_json(strip_timing(report)).encode()).hexdigest()


def report_csv_rows(report: dict) -> list[list]:
    rows = []
    for r in report["records"]:
        rows.append([r.get(c) for c in CSV_COLUMNS])
    return rows
