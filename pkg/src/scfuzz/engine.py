"""Campaign loop: execute, build SCs and reverses, generate, repeat."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .builder import build_with_reverses
from .constraints import (StructureConstraint, canonical_json, canonical_key,
                          satisfied_by)
from .dsl import TargetProgram, collect_literals
from .errors import BuildError, ConfigError, UnsatisfiableSC
from .generator import ValueSet, generate
from .interp import ABORTED, CRASHED, RETURNED, execute
from .lattice import TypeLattice
from .render import parse_listing, render_value, split_blocks
from .trace import encode_record
from .values import StructuredValue, ValueFactory

log = logging.getLogger(__name__)

MODES = ("pycing", "random-baseline")

_DEFAULT_PAYLOAD = {"long": 0, "bool": False, "float": 0.0, "complex": 0j,
                    "str": "", "bytes": b""}


@dataclass
class CampaignConfig:
    sc_cap_per_loop: int = 800
    max_loops: int = 40
    rng_seed: int = 0
    mode: str = "pycing"
    corpus_path: Optional[str] = None
    # total executions allowed; None means unbounded
    exec_budget: Optional[int] = None
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.sc_cap_per_loop < 1 or self.max_loops < 1:
            raise ConfigError("sc_cap_per_loop and max_loops must be positive")
        if self.exec_budget is not None and self.exec_budget < 1:
            raise ConfigError("exec_budget must be positive")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")


@dataclass
class LoopStats:
    loop: int
    executions: int = 0
    new_scs: int = 0
    new_reverses: int = 0
    kept_reverses: int = 0
    generated_inputs: int = 0
    unsat: int = 0

    def to_json(self):
        return dict(self.__dict__)


@dataclass
class Finding:
    kind: str
    path_key: str
    inputs: list[str]
    trace: list[str]
    ledger: dict[int, int] = field(default_factory=dict)
    leaked: int = 0
    message: str = ""
    loop: int = 0
    artifact: Optional[str] = None

    def to_json(self):
        out = {
            "kind": self.kind,
            "path": json.loads(self.path_key),
            "inputs": self.inputs,
            "trace": self.trace,
            "ledger": {str(k): v for k, v in sorted(self.ledger.items())},
            "loop": self.loop,
        }
        if self.kind == "leak":
            out["leaked_objects"] = self.leaked
            out["net_delta"] = sum(self.ledger.values())
        if self.message:
            out["message"] = self.message
        if self.artifact:
            out["artifact"] = self.artifact
        return out


@dataclass
class CampaignReport:
    program: str
    mode: str
    seed: int
    loops: list[LoopStats] = field(default_factory=list)
    explored_keys: list[str] = field(default_factory=list)
    reverse_keys: list[str] = field(default_factory=list)
    api_coverage: dict[tuple[str, str], set] = field(default_factory=dict)
    findings: list[Finding] = field(default_factory=list)
    unsat_count: int = 0
    dropped_reverse_count: int = 0
    unsound_count: int = 0
    executions: int = 0
    error: Optional[str] = None

    @property
    def has_bugs(self) -> bool:
        return any(f.kind in ("leak", "crash") for f in self.findings)

    def to_json(self) -> dict:
        return {
            "program": self.program,
            "mode": self.mode,
            "seed": self.seed,
            "executions": self.executions,
            "loops": [s.to_json() for s in self.loops],
            "explored_scs": [json.loads(k) for k in self.explored_keys],
            "reverse_count": len(self.reverse_keys),
            "coverage": coverage_stats(self),
            "findings": [f.to_json() for f in self.findings],
            "unsat_count": self.unsat_count,
            "dropped_reverse_count": self.dropped_reverse_count,
            "unsound_count": self.unsound_count,
            "error": self.error,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def coverage_stats(report: CampaignReport) -> dict:
    """Distinct (API, argument) pairs and the return kinds seen for each."""
    per_api = {f"{act} {val}": sorted(kinds)
               for (act, val), kinds in sorted(report.api_coverage.items())}
    by_act = {"TC": 0, "AG": 0}
    for act, _ in report.api_coverage:
        by_act[act] += 1
    return {
        "api_pairs": len(report.api_coverage),
        "return_kinds": sum(len(k) for k in report.api_coverage.values()),
        "type_check_pairs": by_act["TC"],
        "attr_get_pairs": by_act["AG"],
        "per_api": per_api,
    }


def summary_text(report: CampaignReport) -> str:
    cov = coverage_stats(report)
    lines = [
        f"program: {report.program}  mode: {report.mode}  seed: {report.seed}",
        f"loops: {len(report.loops)}  executions: {report.executions}",
        f"explored SCs: {len(report.explored_keys)}  reversed SCs: {len(report.reverse_keys)}"
        f"  unsatisfiable: {report.unsat_count}  dropped reverses: {report.dropped_reverse_count}",
        f"API pairs covered: {cov['api_pairs']}  return kinds: {cov['return_kinds']}",
    ]
    for s in report.loops:
        lines.append(f"  loop {s.loop}: {s.executions} runs, {s.new_scs} new SCs, "
                     f"{s.kept_reverses}/{s.new_reverses} reverses kept, "
                     f"{s.generated_inputs} inputs generated, {s.unsat} unsat")
    counts = {}
    for f in report.findings:
        counts[f.kind] = counts.get(f.kind, 0) + 1
    lines.append("findings: " + (", ".join(f"{n} {k}" for k, n in sorted(counts.items()))
                                 or "none"))
    for f in report.findings:
        if f.kind == "abort":
            continue
        detail = f"leaked objects {f.leaked}, ledger {f.ledger}" if f.kind == "leak" else f.message
        lines.append(f"  [{f.kind}] {StructureConstraint.from_json(json.loads(f.path_key))}")
        lines.append(f"      {detail}")
    if report.error:
        lines.append(f"error: {report.error}")
    return "\n".join(lines) + "\n"


def default_value(factory: ValueFactory, type_name: str) -> StructuredValue:
    desc = factory.lattice.descriptor(type_name)
    if desc.storage == "scalar":
        for a in sorted(factory.lattice.ancestors(type_name),
                        key=lambda t: -len(factory.lattice.ancestors(t))):
            if a in _DEFAULT_PAYLOAD:
                return factory.make(desc, payload=_DEFAULT_PAYLOAD[a])
    return factory.make(desc)


def load_corpus(path, factory: ValueFactory) -> list[StructuredValue]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read corpus {path}: {e}") from None
    return [parse_listing(block, factory) for block in split_blocks(text)]


class Campaign:
    def __init__(self, program: TargetProgram, config: CampaignConfig,
                 lattice: TypeLattice, corpus: Optional[list] = None):
        for t in sorted(program.type_names()):
            lattice.descriptor(t)
        self.program = program
        self.config = config
        self.lattice = lattice
        self.rng = random.Random(config.rng_seed)
        self.factory = ValueFactory(lattice)
        self.values = ValueSet.with_defaults()
        literals = sorted(collect_literals(program), key=repr)
        self.values.extend((v for _, v in literals), "source-literal")
        if corpus is None and config.corpus_path:
            corpus = load_corpus(config.corpus_path, self.factory)
        self.corpus = list(corpus or [])
        for v in self.corpus:
            self.values.harvest(v)
        self.seen_keys: set[str] = set()
        self.explored: set[str] = set()
        self.finding_keys: set = set()
        self.report = CampaignReport(program.name, config.mode, config.rng_seed)

    # -- inputs -------------------------------------------------------

    def fill(self, value: StructuredValue) -> list[StructuredValue]:
        """An input set with a fresh copy of ``value`` in every position."""
        return [self.factory.clone(value) for _ in self.program.params]

    def seeds(self) -> list[list[StructuredValue]]:
        out = [self.fill(v) for v in self.corpus]
        scalar_only = self.config.mode == "random-baseline"
        for name in self.lattice.builtins:
            desc = self.lattice.descriptor(name)
            if scalar_only and desc.storage != "scalar":
                continue
            out.append(self.fill(default_value(self.factory, name)))
        return out

    def random_inputs(self, n) -> list[list[StructuredValue]]:
        pool = [v for v, _ in self.values.scalars]
        out = []
        for _ in range(n):
            out.append([self.factory.from_python(self.rng.choice(pool))
                        for _ in self.program.params])
        return out

    # -- per-execution bookkeeping ------------------------------------

    def record(self, inputs, result, sc_key, loop):
        cov = self.report.api_coverage
        for r in result.trace:
            cov.setdefault((r.act.value, r.val_act), set()).add(r.ret_kind)
        if result.outcome == RETURNED and result.leaks:
            kind, extra = "leak", len(result.leaks)
        elif result.outcome == CRASHED:
            kind, extra = "crash", 0
        elif result.outcome == ABORTED:
            kind, extra = "abort", 0
        else:
            return
        fk = (kind, sc_key, extra)
        if fk in self.finding_keys:
            return
        self.finding_keys.add(fk)
        self.report.findings.append(Finding(
            kind=kind,
            path_key=sc_key,
            inputs=[render_value(v) for v in inputs],
            trace=[encode_record(r) for r in result.trace],
            ledger=dict(result.leaks) if kind == "leak" else {},
            leaked=extra,
            message=result.message,
            loop=loop,
        ))

    def run_one(self, inputs, loop, stats, reverses_out):
        result = execute(self.program, inputs, self.lattice)
        stats.executions += 1
        self.report.executions += 1
        roots = {p: v.id for p, v in zip(self.program.params, inputs)}
        built = build_with_reverses(result.trace, roots,
                                    self.seen_keys if self.config.mode == "pycing" else set(),
                                    self.lattice,
                                    reverses=self.config.mode == "pycing")
        key = canonical_key(built.sc)
        if key not in self.explored:
            self.explored.add(key)
            self.report.explored_keys.append(key)
            stats.new_scs += 1
        self.report.dropped_reverse_count += built.dropped
        reverses_out.extend(built.reverses)
        self.record(inputs, result, key, loop)
        return result

    # -- main loop ----------------------------------------------------

    def budget_left(self) -> Optional[int]:
        if self.config.exec_budget is None:
            return None
        return self.config.exec_budget - self.report.executions

    def run(self) -> CampaignReport:
        cfg = self.config
        pending = self.seeds()
        origins: list = [None] * len(pending)
        for loop in range(1, cfg.max_loops + 1):
            stats = LoopStats(loop)
            self.report.loops.append(stats)
            reverses: list[StructureConstraint] = []
            left = self.budget_left()
            if left is not None:
                pending = pending[:max(left, 0)]
            for inputs in pending:
                self.run_one(inputs, loop, stats, reverses)
            stats.new_reverses = len(reverses)
            kept = reverses[:cfg.sc_cap_per_loop]
            # truncated reverses are dropped, but a later trace may rebuild them
            for r in reverses[cfg.sc_cap_per_loop:]:
                self.seen_keys.discard(canonical_key(r))
            for r in kept:
                self.report.reverse_keys.append(canonical_key(r))
            stats.kept_reverses = len(kept)
            self.persist_loop(loop, pending, origins)
            left = self.budget_left()
            if left is not None and left <= 0:
                break
            if cfg.mode == "random-baseline":
                pending = self.random_inputs(cfg.sc_cap_per_loop)
                origins = [None] * len(pending)
                stats.generated_inputs = len(pending)
                continue
            if not kept:
                break
            pending, origins = [], []
            for sc in kept:
                try:
                    made = generate(sc, self.values, self.rng, self.lattice, self.factory)
                except UnsatisfiableSC as e:
                    log.debug("unsatisfiable: %s (%s)", sc, e)
                    stats.unsat += 1
                    self.report.unsat_count += 1
                    continue
                if not satisfied_by(sc, made, self.lattice):
                    # generator bug: counted and skipped, never run silently
                    log.warning("generated input violates %s", sc)
                    self.report.unsound_count += 1
                    continue
                pending.append([made[p] for p in self.program.params])
                origins.append(sc)
            stats.generated_inputs = len(pending)
        self.write_report()
        return self.report

    def persist_loop(self, loop, inputs_run, origins):
        out = self.config.out_dir
        if out is None:
            return
        d = Path(out) / f"loop_{loop:03d}"
        d.mkdir(parents=True, exist_ok=True)
        for i, inputs in enumerate(inputs_run):
            listing = "\n\n".join(render_value(v) for v in inputs) + "\n"
            (d / f"input_{i:04d}.py").write_text(listing, encoding="utf-8")
            if origins[i] is not None:
                (d / f"input_{i:04d}.sc.json").write_text(
                    canonical_json(origins[i].to_json()) + "\n", encoding="utf-8")
        for f in self.report.findings:
            if f.loop == loop and f.artifact is None:
                name = f"finding_{self.report.findings.index(f):03d}_{f.kind}.py"
                (d / name).write_text("\n\n".join(f.inputs) + "\n", encoding="utf-8")
                f.artifact = str(Path(f"loop_{loop:03d}") / name)

    def write_report(self):
        out = self.config.out_dir
        if out is None:
            return
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(self.report.dumps(), encoding="utf-8")
        (d / "summary.txt").write_text(summary_text(self.report), encoding="utf-8")


def run_campaign(program: TargetProgram, config: CampaignConfig,
                 lattice: TypeLattice, corpus: Optional[list] = None) -> CampaignReport:
    c = Campaign(program, config, lattice, corpus)
    try:
        return c.run()
    except BuildError as e:
        c.report.error = f"identity invariant violated: {e}"
        c.write_report()
        return c.report
