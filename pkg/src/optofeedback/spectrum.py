"""Spectrum container and its CSV/JSON exchange format."""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .params import TWO_PI

SCHEMA_VERSION = 1


class Frame(str, enum.Enum):
    LAB = "LabFrame"
    PROBE_ROTATING = "ProbeRotatingFrame"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Power spectral density on an increasing angular-frequency grid.

    ``psd`` is in quanta: a vacuum-limited detector shows 1/2, the detection
    chain adds ``n_add`` on top.
    """

    frequencies: np.ndarray
    psd: np.ndarray
    frame: Frame = Frame.PROBE_ROTATING
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        freq = np.array(self.frequencies, dtype=float)
        psd = np.array(self.psd, dtype=float)
        if freq.ndim != 1 or psd.shape != freq.shape:
            raise ValueError("frequencies and psd must be 1-D arrays of equal length")
        if freq.size > 1 and not np.all(np.diff(freq) > 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(psd < 0):
            raise ValueError("psd must be non-negative")
        freq.setflags(write=False)
        psd.setflags(write=False)
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "psd", psd)
        object.__setattr__(self, "frame", Frame(self.frame))

    def __len__(self):
        return self.frequencies.size

    def window(self, lo, hi) -> "Spectrum":
        mask = (self.frequencies >= lo) & (self.frequencies <= hi)
        return Spectrum(self.frequencies[mask], self.psd[mask], self.frame, dict(self.metadata))

    def shifted(self, offset, frame) -> "Spectrum":
        """Same data relabelled in another frame, ``frequencies + offset``."""
        return Spectrum(self.frequencies + offset, self.psd, frame, dict(self.metadata))

    def scaled(self, factor) -> "Spectrum":
        return Spectrum(self.frequencies, self.psd * factor, self.frame, dict(self.metadata))

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.frequencies.tobytes())
        h.update(self.psd.tobytes())
        h.update(self.frame.value.encode())
        return h.hexdigest()

    # -- exchange format -------------------------------------------------

    def to_csv(self, path=None, manifest=None) -> str:
        """CSV with columns ``frequency_hz, psd_quanta`` at 17 significant digits."""
        buf = io.StringIO()
        buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
        buf.write(f"# frame: {self.frame.value}\n")
        if manifest is not None:
            buf.write(f"# manifest: {manifest}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["frequency_hz", "psd_quanta"])
        for f, s in zip(self.frequencies / TWO_PI, self.psd):
            writer.writerow([f"{f:.17g}", f"{s:.17g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "Spectrum":
        text = Path(source).read_text() if _is_path(source) else str(source)
        frame = Frame.PROBE_ROTATING
        rows = []
        header_seen = False
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                if key.strip() == "frame":
                    frame = Frame(value.strip())
                continue
            if not line.strip():
                continue
            if not header_seen:
                cols = [c.strip() for c in line.split(",")]
                if cols != ["frequency_hz", "psd_quanta"]:
                    raise ValueError(f"unexpected CSV columns {cols}")
                header_seen = True
                continue
            f, s = line.split(",")
            rows.append((float(f), float(s)))
        data = np.array(rows, dtype=float).reshape(-1, 2)
        return cls(data[:, 0] * TWO_PI, data[:, 1], frame)

    def to_json(self, path=None, **extra) -> str:
        """JSON document carrying the data plus frame, floor and a parameter hash."""
        doc = {
            "schema_version": SCHEMA_VERSION,
            "frame": self.frame.value,
            "frequency_hz": (self.frequencies / TWO_PI).tolist(),
            "psd_quanta": self.psd.tolist(),
            "metadata": _jsonable(self.metadata),
        }
        doc.update(_jsonable(extra))
        text = json.dumps(doc, indent=1)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source) -> "Spectrum":
        text = Path(source).read_text() if _is_path(source) else str(source)
        doc = json.loads(text)
        freq = np.asarray(doc["frequency_hz"], dtype=float) * TWO_PI
        return cls(freq, doc["psd_quanta"], Frame(doc["frame"]), doc.get("metadata", {}))


def _is_path(source):
    if isinstance(source, Path):
        return True
    return isinstance(source, str) and "\n" not in source and Path(source).exists()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def params_hash(obj) -> str:
    """Stable short hash of a (nested) parameter mapping."""
    text = json.dumps(_jsonable(obj), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]
