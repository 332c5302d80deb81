"""End-to-end run: ingest, graph, quantify, calibrate, evaluate, write artifacts."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy.special import expit

from . import calibrate, evaluate, ingest, quantify
from .errors import ConfigError, EmptyGraph, MismatchedReference
from .graph import build_graph, connected_components
from .lp import solve_per_component, recover_abundance, build_lp

LOGGER = logging.getLogger(__name__)

EM = "em"
NORMALIZE = "normalize"
CALIBRATIONS = (EM, NORMALIZE)

ABUNDANCE_FILE = "abundance.tsv"
PROBABILITY_FILE = "probabilities.tsv"
CURVE_FILE = "curve.csv"
GROUP_FILE = "groups.tsv"
SUMMARY_FILE = "summary.json"
LP_FILE = "model.lp"


@dataclass
class RunConfig:
    psm_path: str | None = None
    membership_path: str | None = None
    fasta_path: str | None = None
    missed_cleavages: int = 0
    min_length: int = 6
    max_length: int = 50
    method: str = quantify.LINEAR_PROGRAM
    weighting: str = quantify.PROBABILITY
    calibration: str = EM
    reference_mode: str = ingest.REFERENCE_LIST
    reference: str | None = None
    output_dir: str = "out"
    psm_probability_floor: float = 0.0
    lp_iteration_cap: int = 10**6
    em_iteration_cap: int = 100
    workers: int | None = None
    dump_lp: bool = False

    def validate(self) -> None:
        if not self.psm_path:
            raise ConfigError("psm_path is required")
        if bool(self.membership_path) == bool(self.fasta_path):
            raise ConfigError("set exactly one of membership_path and fasta_path")
        if self.method not in quantify.METHODS:
            raise ConfigError(f"method must be one of {quantify.METHODS}, got {self.method!r}")
        if self.weighting not in quantify.WEIGHTINGS:
            raise ConfigError(f"weighting must be one of {quantify.WEIGHTINGS}")
        if self.calibration not in CALIBRATIONS:
            raise ConfigError(f"calibration must be one of {CALIBRATIONS}")
        if self.reference_mode not in (ingest.REFERENCE_LIST, ingest.DECOY_PREFIX):
            raise ConfigError("reference_mode must be 'list' or 'decoy'")
        if not self.reference:
            raise ConfigError("reference (list path or decoy prefix) is required")
        if not 0.0 <= self.psm_probability_floor <= 1.0:
            raise ConfigError("psm_probability_floor must lie in [0, 1]")
        if not 0 <= self.missed_cleavages <= 3 or not 1 <= self.min_length <= self.max_length:
            raise ConfigError("invalid digestion parameters")
        if self.lp_iteration_cap < 1 or self.em_iteration_cap < 1:
            raise ConfigError("iteration caps must be positive")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be positive")

    @classmethod
    def from_dict(cls, data: dict, *, base_dir: Path | None = None) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg = cls(**data)
        if base_dir is not None:
            for name in ("psm_path", "membership_path", "fasta_path", "output_dir"):
                v = getattr(cfg, name)
                if v and not Path(v).is_absolute():
                    setattr(cfg, name, str(base_dir / v))
            if cfg.reference_mode == ingest.REFERENCE_LIST and cfg.reference \
                    and not Path(cfg.reference).is_absolute():
                cfg.reference = str(base_dir / cfg.reference)
        return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc.msg}", path=str(path), line=exc.lineno)
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", path=str(path))
    return RunConfig.from_dict(data, base_dir=path.parent)


@dataclass
class RunResult:
    output_dir: Path
    abundance: quantify.AbundanceVector
    probabilities: np.ndarray
    groups: list[evaluate.ProteinGroup]
    curve: evaluate.EvaluationCurve
    summary: dict


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def quantify_graph(graph, method: str, weighting: str, *, workers=1,
                   lp_iteration_cap: int = 10**6):
    """Protein abundance by one method; returns (AbundanceVector, LpSolution or None)."""
    b = quantify.peptide_abundance(graph, weighting)
    solution = None
    if method == quantify.MULTIPLE_COUNTING:
        vec = quantify.multiple_counting(graph, b)
    elif method == quantify.EQUAL_DIVISION:
        vec = quantify.equal_division(graph, b)
    else:
        solution = solve_per_component(graph, b, workers=workers, max_iter=lp_iteration_cap)
        vec = recover_abundance(solution, b)
    return quantify.AbundanceVector(graph, vec.b, vec.c, vec.method, weighting), solution


def calibrate_scores(c: np.ndarray, calibration: str, *, em_iteration_cap: int = 100):
    """Ranking scores, a map from ranking score to probability, and model info.

    EM ranks by log-odds rather than by probability: steep fits round many
    probabilities to exactly 0 or 1, which would manufacture ties.
    """
    if calibration == EM:
        model, indicators = calibrate.em_fit(c, max_iter=em_iteration_cap)
        info = {"A": model.A, "B": model.B, "em_iterations": model.iterations,
                "em_converged": model.converged, "em_nll": model.final_nll,
                "em_present": int(indicators.sum())}
        return model.log_odds(c), (lambda s: expit(s)), info
    return calibrate.normalized_score(c), (lambda s: s), {}


def run_pipeline(config: RunConfig) -> RunResult:
    config.validate()
    out = Path(config.output_dir)

    with open(config.psm_path, encoding="utf-8") as fh:
        psms = ingest.parse_psm_table(fh)
    n_read = len(psms)
    psms = [p for p in psms if p.probability >= config.psm_probability_floor]
    if config.membership_path:
        with open(config.membership_path, encoding="utf-8") as fh:
            memberships = ingest.parse_membership_table(fh)
    else:
        with open(config.fasta_path, encoding="utf-8") as fh:
            memberships = ingest.digest_fasta(fh, config.missed_cleavages,
                                              config.min_length, config.max_length)
    reference = ingest.parse_reference(config.reference_mode, config.reference)

    graph = build_graph(psms, memberships)
    if graph.n_proteins == 0:
        raise EmptyGraph("no PSMs left to build a graph from", path=config.psm_path)
    n_components = len(connected_components(graph))
    LOGGER.info("graph: %d spectra, %d peptides, %d proteins, %d components",
                graph.n_spectra, graph.n_peptides, graph.n_proteins, n_components)

    abundance, solution = quantify_graph(graph, config.method, config.weighting,
                                         workers=config.workers,
                                         lp_iteration_cap=config.lp_iteration_cap)
    rank_scores, to_prob, cal_info = calibrate_scores(abundance.c, config.calibration,
                                                      em_iteration_cap=config.em_iteration_cap)
    groups = evaluate.group_proteins(graph, rank_scores)
    labels = evaluate.label(groups, reference)
    curve = evaluate.curve_from_groups(groups, reference)
    group_prob = {g.group_id: float(to_prob(g.score)) for g in groups}
    probabilities = np.array([float(to_prob(s)) for s in rank_scores])

    summary = {
        "psms_read": n_read,
        "spectra": graph.n_spectra,
        "peptides": graph.n_peptides,
        "proteins": graph.n_proteins,
        "dropped_proteins": len(graph.dropped_proteins),
        "components": n_components,
        "protein_groups": len(groups),
        "method": config.method,
        "weighting": config.weighting,
        "calibration": config.calibration,
        "reference": reference.describe(),
        "total_abundance": float(abundance.c.sum()),
        "tp_at_q": {f"{q:g}": curve.tp_at(q) for q in evaluate.Q_GRID},
        **cal_info,
    }
    if solution is not None:
        summary["lp_objective"] = solution.objective
        summary["lp_iterations"] = solution.iterations

    out.mkdir(parents=True, exist_ok=True)
    with open(out / ABUNDANCE_FILE, "w", encoding="utf-8", newline="") as fh:
        fh.write("accession\tabundance\n")
        for acc, c in zip(graph.proteins, abundance.c.tolist()):
            fh.write(f"{acc}\t{_fmt(c)}\n")
    with open(out / PROBABILITY_FILE, "w", encoding="utf-8", newline="") as fh:
        fh.write("accession\tgroup_id\tprobability\n")
        for g in groups:
            for acc in g.members:
                fh.write(f"{acc}\t{g.group_id}\t{_fmt(group_prob[g.group_id])}\n")
    with open(out / GROUP_FILE, "w", encoding="utf-8", newline="") as fh:
        evaluate.write_group_report(groups, labels, fh)
    evaluate.write_curve(curve.map_scores(to_prob), out / CURVE_FILE)
    with open(out / SUMMARY_FILE, "w", encoding="utf-8", newline="") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if config.dump_lp:
        b = quantify.peptide_abundance(graph, config.weighting)
        with open(out / LP_FILE, "w", encoding="utf-8", newline="") as fh:
            fh.write(build_lp(graph, b).to_lp_text())
    return RunResult(out, abundance, probabilities, groups, curve, summary)


def read_summary(run_dir) -> dict:
    path = Path(run_dir) / SUMMARY_FILE
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def compare_runs(run_a, run_b) -> list[tuple[float, int, int]]:
    """True positives at the fixed q-value grid for two finished runs."""
    sa, sb = read_summary(run_a), read_summary(run_b)
    if sa["reference"] != sb["reference"]:
        raise MismatchedReference(f"runs {run_a} and {run_b} were evaluated against different references")
    return [(q, sa["tp_at_q"][f"{q:g}"], sb["tp_at_q"][f"{q:g}"]) for q in evaluate.Q_GRID]


def format_comparison(rows, name_a: str, name_b: str) -> str:
    lines = [f"q_value\t{name_a}\t{name_b}"]
    lines += [f"{q:g}\t{a}\t{b}" for q, a, b in rows]
    return "\n".join(lines) + "\n"


def config_dict(config: RunConfig) -> dict:
    return asdict(config)
