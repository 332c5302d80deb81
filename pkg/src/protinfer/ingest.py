"""Readers and writers for PSM tables, memberships, FASTA and reference sets."""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

from .errors import EmptyReference, InvalidProbability, MalformedFasta, MalformedRow
from .graph import Psm

PSM_HEADER = ("spectrum", "peptide", "probability")
MEMBERSHIP_HEADER = ("peptide", "protein")

REFERENCE_LIST = "list"
DECOY_PREFIX = "decoy"

_BRACKETED = re.compile(r"(\[[^\]]*\]|\([^)]*\)|\{[^}]*\})")


def canonical_peptide(seq: str) -> str:
    """Uppercase residues; bracketed modification text is kept verbatim."""
    parts = _BRACKETED.split(seq.strip())
    return "".join(p if i % 2 else p.upper() for i, p in enumerate(parts))


def _name(stream) -> str | None:
    return getattr(stream, "name", None)


def _rows(stream: TextIO, header: tuple[str, ...]) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, fields) for data rows, checking the header first."""
    path = _name(stream)
    seen_header = False
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if not seen_header:
            if tuple(f.lower() for f in fields) != header:
                raise MalformedRow(f"expected header {'<TAB>'.join(header)!r}, got {line!r}",
                                   path=path, line=lineno)
            seen_header = True
            continue
        if len(fields) != len(header):
            raise MalformedRow(f"expected {len(header)} columns, got {len(fields)}",
                               path=path, line=lineno)
        if not all(fields):
            raise MalformedRow("empty field", path=path, line=lineno)
        yield lineno, fields


def parse_psm_table(stream: TextIO) -> list[Psm]:
    """Read ``spectrum<TAB>peptide<TAB>probability`` rows in file order."""
    path = _name(stream)
    out = []
    for lineno, (spectrum, peptide, prob) in _rows(stream, PSM_HEADER):
        try:
            p = float(prob)
        except ValueError:
            raise MalformedRow(f"unparsable probability {prob!r}", path=path, line=lineno)
        if not (math.isfinite(p) and 0.0 <= p <= 1.0):
            raise InvalidProbability(f"probability {prob} outside [0, 1]", path=path, line=lineno)
        out.append(Psm(spectrum, canonical_peptide(peptide), p))
    return out


def parse_membership_table(stream: TextIO) -> list[tuple[str, str]]:
    """Read ``peptide<TAB>protein`` rows; repeated pairs collapse to one."""
    seen: dict[tuple[str, str], None] = {}
    for _, (peptide, protein) in _rows(stream, MEMBERSHIP_HEADER):
        seen.setdefault((canonical_peptide(peptide), protein), None)
    return list(seen)


def write_psm_table(psms: Iterable[Psm], sink: TextIO) -> None:
    sink.write("\t".join(PSM_HEADER) + "\n")
    for p in psms:
        sink.write(f"{p.spectrum}\t{p.peptide}\t{p.probability!r}\n")


def write_membership_table(pairs: Iterable[tuple[str, str]], sink: TextIO) -> None:
    sink.write("\t".join(MEMBERSHIP_HEADER) + "\n")
    for peptide, protein in pairs:
        sink.write(f"{peptide}\t{protein}\n")


def read_fasta(stream: TextIO) -> Iterator[tuple[str, str]]:
    """Yield (accession, sequence); the accession is the header up to whitespace."""
    path = _name(stream)
    accession = None
    chunks: list[str] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            if accession is not None:
                yield accession, "".join(chunks)
            tokens = line[1:].split()
            if not tokens:
                raise MalformedFasta("header without accession", path=path, line=lineno)
            accession, chunks = tokens[0], []
        else:
            if accession is None:
                raise MalformedFasta("sequence data before first header", path=path, line=lineno)
            chunks.append("".join(line.split()).upper())
    if accession is not None:
        yield accession, "".join(chunks)


def tryptic_fragments(sequence: str) -> list[str]:
    """Cut after K or R unless the next residue is P."""
    frags = []
    start = 0
    for i, aa in enumerate(sequence):
        if aa in "KR" and i + 1 < len(sequence) and sequence[i + 1] != "P":
            frags.append(sequence[start:i + 1])
            start = i + 1
    if start < len(sequence):
        frags.append(sequence[start:])
    return frags


def digest_sequence(sequence: str, missed_cleavages: int = 0, min_len: int = 6,
                    max_len: int = 50) -> list[str]:
    """Distinct tryptic peptides, in order of first occurrence."""
    frags = tryptic_fragments(sequence)
    seen: dict[str, None] = {}
    for i in range(len(frags)):
        pep = ""
        for k in range(missed_cleavages + 1):
            if i + k >= len(frags):
                break
            pep += frags[i + k]
            if min_len <= len(pep) <= max_len:
                seen.setdefault(pep, None)
    return list(seen)


def digest_fasta(stream: TextIO, missed_cleavages: int = 0, min_len: int = 6,
                 max_len: int = 50) -> list[tuple[str, str]]:
    """In-silico tryptic digest of every FASTA record into (peptide, protein) pairs."""
    if not 0 <= missed_cleavages <= 3:
        raise ValueError("missed_cleavages must be between 0 and 3")
    if not 1 <= min_len <= max_len:
        raise ValueError("need 1 <= min_len <= max_len")
    pairs: dict[tuple[str, str], None] = {}
    for accession, seq in read_fasta(stream):
        for pep in digest_sequence(seq, missed_cleavages, min_len, max_len):
            pairs.setdefault((pep, accession), None)
    return list(pairs)


@dataclass(frozen=True)
class ReferenceSet:
    """Ground truth for labelling: an accession list or a decoy prefix."""

    mode: str
    accessions: frozenset[str] = frozenset()
    prefix: str = ""

    def __post_init__(self):
        if self.mode == REFERENCE_LIST:
            if not self.accessions:
                raise EmptyReference("reference list is empty")
        elif self.mode == DECOY_PREFIX:
            if not self.prefix:
                raise EmptyReference("decoy prefix is empty")
        else:
            raise ValueError(f"unknown reference mode {self.mode!r}")

    def is_decoy(self, accession: str) -> bool:
        return self.mode == DECOY_PREFIX and accession.startswith(self.prefix)

    def is_true(self, accession: str) -> bool:
        if self.mode == REFERENCE_LIST:
            return accession in self.accessions
        return not accession.startswith(self.prefix)

    def describe(self) -> dict:
        """Stable identity used to check two runs share a reference."""
        if self.mode == DECOY_PREFIX:
            return {"mode": DECOY_PREFIX, "prefix": self.prefix}
        digest = hashlib.sha256("\n".join(sorted(self.accessions)).encode()).hexdigest()
        return {"mode": REFERENCE_LIST, "size": len(self.accessions), "sha256": digest}


def read_reference_list(stream: TextIO) -> ReferenceSet:
    accessions = set()
    for raw in stream:
        line = raw.strip()
        if line and not line.startswith("#"):
            accessions.add(line.split()[0])
    if not accessions:
        raise EmptyReference("reference list is empty", path=_name(stream))
    return ReferenceSet(REFERENCE_LIST, frozenset(accessions))


def parse_reference(mode: str, value: str) -> ReferenceSet:
    """``mode='list'``: ``value`` is a file path; ``mode='decoy'``: the prefix."""
    if mode == REFERENCE_LIST:
        with open(value, encoding="utf-8") as fh:
            return read_reference_list(fh)
    if mode == DECOY_PREFIX:
        return ReferenceSet(DECOY_PREFIX, prefix=value)
    raise ValueError(f"unknown reference mode {mode!r}")


def write_reference_list(accessions: Iterable[str], sink: TextIO) -> None:
    for acc in accessions:
        sink.write(f"{acc}\n")
