"""Synthetic datasets with planted ground truth.

Proteins come in small families (think paralogs or isoforms); shared peptides
are only ever shared inside a family, which keeps the identification graph
split into many small components as in real data.  Present proteins emit
high-probability PSMs on their peptides; noise PSMs with low probabilities
land on random database peptides, including those of absent proteins.

This is the only module that uses random numbers, always from an explicit
seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import InvalidSpec
from .graph import Psm
from .ingest import write_membership_table, write_psm_table, write_reference_list

RESIDUES = "ACDEFGHILMNPQSTVWY"


@dataclass(frozen=True)
class SynthSpec:
    n_proteins: int = 500
    present_fraction: float = 0.3
    peptides_per_protein: tuple[int, int] = (2, 8)
    shared_peptide_fraction: float = 0.3
    psm_per_peptide: tuple[int, int] = (1, 4)
    true_psm_mean: float = 0.9
    true_psm_spread: float = 0.08
    noise_psm_mean: float = 0.3
    noise_psm_spread: float = 0.15
    noise_psm_rate: float = 0.5
    family_size: tuple[int, int] = (1, 4)
    seed: int = 0

    def validate(self) -> None:
        if self.n_proteins < 1:
            raise InvalidSpec("n_proteins must be positive")
        for name in ("present_fraction", "shared_peptide_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidSpec(f"{name} must lie in [0, 1], got {v}")
        for name in ("peptides_per_protein", "psm_per_peptide", "family_size"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise InvalidSpec(f"{name} must be a range with 1 <= low <= high, got {(lo, hi)}")
        if self.noise_psm_rate < 0:
            raise InvalidSpec("noise_psm_rate must be non-negative")
        for kind in ("true", "noise"):
            mean = getattr(self, f"{kind}_psm_mean")
            spread = getattr(self, f"{kind}_psm_spread")
            if not 0.0 < mean < 1.0 or not 0.0 < spread ** 2 < mean * (1.0 - mean):
                raise InvalidSpec(f"{kind} PSM probability mean/spread do not define a beta law")

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidSpec(f"unknown spec fields: {sorted(unknown)}")
        data = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**data)


def _beta(rng, mean: float, spread: float, size: int) -> np.ndarray:
    kappa = mean * (1.0 - mean) / spread ** 2 - 1.0
    return rng.beta(mean * kappa, (1.0 - mean) * kappa, size=size)


def _families(rng, n: int, size_range: tuple[int, int]) -> list[list[int]]:
    out, start = [], 0
    while start < n:
        size = int(rng.integers(size_range[0], size_range[1] + 1))
        out.append(list(range(start, min(n, start + size))))
        start += size
    return out


class _Sequences:
    """Unique random tryptic-looking peptide sequences."""

    def __init__(self, rng):
        self.rng = rng
        self.used: set[str] = set()

    def new(self) -> str:
        while True:
            length = int(self.rng.integers(6, 20))
            body = "".join(RESIDUES[i] for i in self.rng.integers(0, len(RESIDUES), length))
            seq = body + "KR"[int(self.rng.integers(0, 2))]
            if seq not in self.used:
                self.used.add(seq)
                return seq


@dataclass
class SynthDataset:
    psms: list[Psm]
    memberships: list[tuple[str, str]]
    reference: list[str]
    proteins: list[str] = field(default_factory=list)

    def write(self, out_dir) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"psms": out / "psms.tsv", "memberships": out / "memberships.tsv",
                 "reference": out / "reference.txt"}
        with open(paths["psms"], "w", encoding="utf-8", newline="") as fh:
            write_psm_table(self.psms, fh)
        with open(paths["memberships"], "w", encoding="utf-8", newline="") as fh:
            write_membership_table(self.memberships, fh)
        with open(paths["reference"], "w", encoding="utf-8", newline="") as fh:
            write_reference_list(self.reference, fh)
        return paths


def generate(spec: SynthSpec) -> SynthDataset:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    width = len(str(spec.n_proteins))
    names = [f"PROT{k:0{width}d}" for k in range(spec.n_proteins)]
    seqs = _Sequences(rng)

    parents: list[list[int]] = []
    for fam in _families(rng, spec.n_proteins, spec.family_size):
        for k in fam:
            n_pep = int(rng.integers(spec.peptides_per_protein[0], spec.peptides_per_protein[1] + 1))
            for _ in range(n_pep):
                others = [o for o in fam if o != k]
                if others and rng.random() < spec.shared_peptide_fraction:
                    n_extra = int(rng.integers(1, len(others) + 1))
                    extra = rng.choice(others, size=n_extra, replace=False).tolist()
                    parents.append(sorted([k] + extra))
                else:
                    parents.append([k])
    peptides = [seqs.new() for _ in parents]

    n_present = int(round(spec.present_fraction * spec.n_proteins))
    present = np.zeros(spec.n_proteins, dtype=bool)
    present[rng.choice(spec.n_proteins, size=n_present, replace=False)] = True

    true_hits: list[int] = []
    for j, ks in enumerate(parents):
        if present[ks].any():
            n = int(rng.integers(spec.psm_per_peptide[0], spec.psm_per_peptide[1] + 1))
            true_hits.extend([j] * n)
    true_prob = _beta(rng, spec.true_psm_mean, spec.true_psm_spread, len(true_hits))
    n_noise = int(round(spec.noise_psm_rate * len(true_hits)))
    noise_hits = rng.integers(0, len(peptides), n_noise).tolist()
    noise_prob = _beta(rng, spec.noise_psm_mean, spec.noise_psm_spread, n_noise)

    hits = true_hits + noise_hits
    probs = np.r_[true_prob, noise_prob]
    order = rng.permutation(len(hits))
    sw = len(str(len(hits)))
    psms = [Psm(f"S{i:0{sw}d}", peptides[hits[o]], float(probs[o])) for i, o in enumerate(order)]
    memberships = [(peptides[j], names[k]) for j, ks in enumerate(parents) for k in ks]
    reference = [names[k] for k in np.flatnonzero(present)]
    return SynthDataset(psms, memberships, reference, names)


def load_spec(path) -> SynthSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"not valid JSON: {exc}", path=str(path))
    return SynthSpec.from_dict(data)


def dump_spec(spec: SynthSpec) -> str:
    return json.dumps(asdict(spec), indent=2, sort_keys=True)


def family_graph(n_proteins: int, n_peptides: int, n_edges: int, *, max_family: int = 6,
                 shared_degree: float = 2.5, seed: int = 0):
    """Membership pairs and peptide abundances with exact graph sizes.

    Every protein gets at least one unique peptide.  Shared peptides (about
    ``shared_degree`` parents each, always inside one family) absorb the
    edges beyond one per peptide.  Returns ``(memberships, abundances)`` with
    abundances keyed by peptide.
    """
    rng = np.random.default_rng(seed)
    multi = [f for f in _families(rng, n_proteins, (1, max_family)) if len(f) >= 2]
    surplus = n_edges - n_peptides
    n_shared = int(round(surplus / (shared_degree - 1.0))) if surplus > 0 else 0
    n_unique = n_peptides - n_shared
    if surplus < 0 or n_unique < n_proteins or (n_shared and not multi):
        raise InvalidSpec("cannot realise the requested graph sizes")

    owners = np.r_[np.arange(n_proteins), rng.integers(0, n_proteins, n_unique - n_proteins)]
    pairs: list[tuple[int, int]] = [(j, int(k)) for j, k in enumerate(owners)]

    fam_of = [multi[i] for i in rng.integers(0, len(multi), n_shared)]
    sizes = np.full(n_shared, 2)
    room = np.array([len(f) - 2 for f in fam_of], dtype=np.int64)
    extra = n_edges - n_unique - 2 * n_shared
    if extra < 0 or extra > room.sum():
        raise InvalidSpec("families too small for the requested edge count")
    while extra > 0:
        open_idx = np.flatnonzero(room > 0)
        pick = rng.choice(open_idx, size=min(extra, len(open_idx)), replace=False)
        sizes[pick] += 1
        room[pick] -= 1
        extra -= len(pick)
    for i, (fam, size) in enumerate(zip(fam_of, sizes.tolist())):
        for k in rng.choice(fam, size=size, replace=False).tolist():
            pairs.append((n_unique + i, k))

    pep_names = [f"PEP{j:07d}" for j in range(n_peptides)]
    prot_names = [f"PROT{k:06d}" for k in range(n_proteins)]
    memberships = [(pep_names[j], prot_names[k]) for j, k in pairs]
    b = dict(zip(pep_names, np.round(rng.gamma(1.5, 1.5, n_peptides), 3).tolist()))
    return memberships, b
