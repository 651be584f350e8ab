"""Fixture loading: newform tables, dimension data, periods, curve models.

Everything on disk lives under a single fixtures root:

  newforms/prefixes.tsv   registry of available eigenforms with pinned a_1..a_11
  newforms/<label>.tsv    coefficient tables, one "n <tab> a_n" line per index
  dims.tsv                classical space dimensions (level, character, weight)
  periods.tsv             canonical periods as scaled p-adic units
  curves.tsv              Weierstrass models, one or more per isogeny class

Loaders validate what they can: the header of a coefficient table must agree
with the registry row, indices must be contiguous from 1, the stored prefix
must match the table (PrefixMismatch), and a request for more coefficients
than the table holds raises InsufficientCoefficients instead of zero-filling.
"""

import hashlib
import os
from dataclasses import dataclass
from typing import Dict, List, Tuple

from . import errors
from .context import ScaledPadic
from .qexp import QExpansion
from .spaces import DimensionTable

# eigenform labels each level's engine ingests as ladder seeds
INGEST = {
    57: ("57.2.f", "57.2.g", "57.2.h"),
    45: ("15.2.a", "45.2.f0"),
    21: ("21.2.f0",),
    11: ("11.2.f0", "11.7.f"),
    1: (),
}


@dataclass(frozen=True)
class RegistryRow:
    label: str
    level: int
    weight: int
    charlabel: str
    prefix: Tuple[int, ...]  # a_1..a_11


class FixtureStore:
    """Read-through loader over one fixtures directory."""

    def __init__(self, root):
        self.root = root
        self._registry = None
        self._dims = None
        self._periods = None
        self._curves = None

    def _path(self, *parts):
        return os.path.join(self.root, *parts)

    # -- registry ----------------------------------------------------------

    def registry(self) -> Dict[str, RegistryRow]:
        if self._registry is None:
            rows = {}
            with open(self._path("newforms", "prefixes.tsv")) as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    label, N, k, charlabel, pre = line.split("\t")
                    prefix = tuple(int(v) for v in pre.split(","))
                    assert len(prefix) == 11, "registry prefix must be a_1..a_11"
                    assert label not in rows, "duplicate registry label %s" % label
                    rows[label] = RegistryRow(label, int(N), int(k), charlabel, prefix)
            self._registry = rows
        return self._registry

    # -- newform coefficient tables ----------------------------------------

    def newform(self, ctx, label, qprec) -> QExpansion:
        """Load a cusp form's q-expansion with qprec coefficients (a_0 = 0)."""
        reg = self.registry().get(label)
        if reg is None:
            raise errors.PrefixMismatch("label %s is not in the registry" % label)
        path = self._path("newforms", label + ".tsv")
        coeffs = [0] * qprec
        have = 0
        with open(path) as fh:
            head = fh.readline().rstrip("\n").split("\t")
            assert len(head) == 4, "bad header in %s" % path
            if (head[0], int(head[1]), int(head[2]), head[3]) != (
                reg.label, reg.level, reg.weight, reg.charlabel,
            ):
                raise errors.PrefixMismatch(
                    "header of %s disagrees with the registry" % path
                )
            for line in fh:
                n_s, a_s = line.split("\t")
                n = int(n_s)
                have += 1
                assert n == have, "table %s skips index %d" % (path, have)
                if n < qprec:
                    coeffs[n] = int(a_s)
        if have + 1 < qprec:
            raise errors.InsufficientCoefficients(
                "%s holds a_1..a_%d, need %d coefficients" % (label, have, qprec)
            )
        got = tuple(coeffs[1:12]) if qprec >= 12 else reg.prefix
        if got != reg.prefix:
            raise errors.PrefixMismatch(
                "prefix of %s disagrees with the registry" % label
            )
        return QExpansion.from_ints(ctx, coeffs, reg.weight, reg.level,
                                    reg.charlabel)

    def seeds(self, ctx, N, qprec):
        """(label, q-expansion) pairs the level-N ladder ingests, sorted."""
        labels = INGEST.get(N, ())
        return [(lab, self.newform(ctx, lab, qprec)) for lab in sorted(labels)]

    def fixtures_key(self, N) -> str:
        """Digest of the ingested tables, for engine cache invalidation."""
        h = hashlib.sha256()
        for lab in sorted(INGEST.get(N, ())):
            h.update(lab.encode())
            with open(self._path("newforms", lab + ".tsv"), "rb") as fh:
                h.update(fh.read())

        return h.hexdigest()[:16]

    # -- dimensions, periods, curves ----------------------------------------

    def dims(self) -> DimensionTable:
        if self._dims is None:
            self._dims = DimensionTable.load(self._path("dims.tsv"))
        return self._dims

    def periods(self) -> Dict[Tuple[str, int], ScaledPadic]:
        """Canonical periods keyed by (newform label, prime)."""
        if self._periods is None:
            out = {}
            with open(self._path("periods.tsv")) as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    label, p_s, val, digits, prec = line.split("\t")
                    p = int(p_s)
                    unit = 0
                    for d in reversed(digits.split(",")):
                        unit = unit * p + int(d)
                    out[(label, p)] = ScaledPadic(p, int(val), unit, int(prec))
            self._periods = out
        return self._periods

    def curves(self) -> Dict[str, List[Tuple[int, ...]]]:
        """Weierstrass coefficient tuples (a1, a2, a3, a4, a6) per label."""
        if self._curves is None:
            out: Dict[str, List[Tuple[int, ...]]] = {}
            with open(self._path("curves.tsv")) as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    parts = line.split("\t")
                    label = parts[0]
                    out.setdefault(label, []).append(
                        tuple(int(v) for v in parts[2:7])
                    )
            self._curves = out
        return self._curves


def default_store() -> FixtureStore:
    """Store over the fixtures directory shipped next to the package."""
    here = os.path.dirname(os.path.abspath(__file__))
    for up in (("..", ".."), ("..", "..", "..")):
        root = os.path.join(here, *up, "fixtures")
        if os.path.isdir(root):
            return FixtureStore(root)
    raise FileNotFoundError("no fixtures directory next to the package")
