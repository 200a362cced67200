"""Revenue-versus-items curves written as CSV plus a JSON manifest."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .distributions import EqualRevenue, Exponential, Marginal, ProductPrior, ShiftedExponential, make_marginal
from .mechanisms import eval_brev, eval_cdw, eval_simple, eval_srev
from .sampling import Estimate, SampleConfig

__all__ = ["ExperimentSpec", "CSV_COLUMNS", "run_figure", "figure1_spec", "evaluate", "reference_curve",
           "write_rows"]

CSV_COLUMNS = ("instance_id", "mechanism", "bidders", "m", "mean", "stderr", "samples", "seed", "method", "flags")
MECHANISMS = ("WEL", "VCG", "BSPA", "SREV", "BREV", "CDW")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    marginal: Marginal
    mechanisms: tuple[tuple[str, int], ...]
    m_values: tuple[int, ...]
    cfg: SampleConfig = field(default_factory=SampleConfig)
    out: str | None = None

    def __post_init__(self):
        if not self.m_values:
            raise ValueError("m_values: empty m range")
        if any(int(m) != m or m < 1 for m in self.m_values):
            raise ValueError(f"m_values: entries must be integers >= 1: {self.m_values}")
        mechs = []
        for kind, bidders in self.mechanisms:
            kind = str(kind).upper()
            if kind not in MECHANISMS:
                raise ValueError(f"mechanisms: unknown mechanism {kind!r}; expected one of {MECHANISMS}")
            if int(bidders) != bidders or bidders < 1:
                raise ValueError(f"mechanisms: bidders must be >= 1 for {kind}: {bidders}")
            mechs.append((kind, int(bidders)))
        if not mechs:
            raise ValueError("mechanisms: empty mechanism list")
        object.__setattr__(self, "mechanisms", tuple(mechs))
        object.__setattr__(self, "marginal", make_marginal(self.marginal))

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExperimentSpec":
        try:
            ms = d["m"]
            m_values = tuple(range(ms["start"], ms["stop"] + 1)) if isinstance(ms, Mapping) else tuple(ms)
            cfg = SampleConfig(**d.get("sampling", {}))
            mechs = tuple((x["kind"], x["bidders"]) for x in d["mechanisms"])
            return cls(d.get("name", "experiment"), make_marginal(d["prior"]), mechs, m_values, cfg, d.get("out"))
        except KeyError as e:
            raise ValueError(f"experiment spec: missing field {e.args[0]!r}") from None
        except TypeError as e:
            raise ValueError(f"experiment spec: {e}") from None


def evaluate(kind: str, prior: ProductPrior, bidders: int, cfg: SampleConfig) -> Estimate:
    kind = kind.upper()
    if kind in ("WEL", "VCG", "BSPA"):
        return eval_simple(kind, prior, bidders, cfg)
    if kind == "SREV":
        return eval_srev(prior, bidders, cfg)
    if kind == "BREV":
        return eval_brev(prior, bidders, cfg)
    if kind == "CDW":
        return eval_cdw(prior, bidders, cfg)
    raise ValueError(f"unknown mechanism {kind!r}")


def _row(instance_id: str, kind: str, bidders: int, m: int, est: Estimate) -> list:
    return [instance_id, kind, bidders, m, repr(float(est.mean)), repr(float(est.stderr)), est.samples, est.seed,
            est.method, ";".join(est.flags)]


def write_rows(rows, path: str | Path | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def run_figure(spec: ExperimentSpec, out: str | Path | None = None) -> Path | str:
    """Evaluate every (m, mechanism) cell; write CSV and ``<out>.manifest.json``.

    Each cell draws from a seed derived from the experiment seed and the cell's
    labels, so cells are independent of evaluation order.
    """
    rows = []
    manifest = {"name": spec.name, "sampling": spec.cfg.__dict__.copy(), "columns": list(CSV_COLUMNS),
                "mechanisms": [list(x) for x in spec.mechanisms], "instances": {}}
    for m in spec.m_values:
        prior = ProductPrior.iid(spec.marginal, m)
        iid = f"{spec.name}-m{m}"
        manifest["instances"][iid] = {"m": m, "prior": prior.marginals[0].to_spec()}
        for kind, bidders in spec.mechanisms:
            est = evaluate(kind, prior, bidders, spec.cfg.derive(iid, kind, bidders))
            rows.append(_row(iid, kind, bidders, m, est))
    out = out if out is not None else spec.out
    text = write_rows(rows, out)
    if out is None:
        return text
    out = Path(out)
    out.with_name(out.name + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def figure1_spec(panel: str, cfg: SampleConfig | None = None, m_max: int = 40, shift: float = 0.0) -> ExperimentSpec:
    """Panel a: exponential values (optionally shifted); panel b: equal-revenue values."""
    cfg = cfg or SampleConfig(seed=1, samples=100_000)
    if panel == "a":
        mg = Exponential(1.0) if shift == 0.0 else ShiftedExponential(1.0, shift)
        mechs = (("CDW", 1), ("BSPA", 3), ("BSPA", 2), ("VCG", 4), ("VCG", 3))
    elif panel == "b":
        mg = EqualRevenue()
        mechs = (("CDW", 1), ("BSPA", 3), ("VCG", 5))
    else:
        raise ValueError(f"panel must be 'a' or 'b': {panel!r}")
    return ExperimentSpec(f"fig1{panel}", mg, mechs, tuple(range(1, m_max + 1)), cfg)


def reference_curve(panel: str) -> list[dict]:
    """Plotted reference coordinates shipped with the package (comparison only)."""
    if panel not in ("a", "b"):
        raise ValueError(f"panel must be 'a' or 'b': {panel!r}")
    text = resources.files("auctioncc").joinpath(f"data/fig1{panel}_reference.csv").read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        r["m"] = int(r["m"])
        r["bidders"] = int(r["bidders"])
        r["value"] = float(r["value"])
    return rows
