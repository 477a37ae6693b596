"""Per-ion shift samples with summary statistics and histogram."""

from dataclasses import dataclass

import numpy as np

HISTOGRAM_BINS = 50
HISTOGRAM_SPAN_SIGMAS = 4.0


@dataclass(frozen=True)
class ShiftDistribution:
    """Per-ion frequency shifts plus derived statistics.

    ``unit`` is "fractional" or "Hz". The histogram spans mean +/- 4 sigma
    with 50 uniform bins by default.
    """

    per_ion: np.ndarray
    mean: float
    std: float
    min: float
    max: float
    bin_edges: np.ndarray
    counts: np.ndarray
    label: str
    unit: str

    @classmethod
    def from_samples(cls, values, label, unit="fractional",
                     bins=HISTOGRAM_BINS):
        values = np.asarray(values, dtype=np.float64)
        mean = float(values.mean())
        std = float(values.std())
        span = HISTOGRAM_SPAN_SIGMAS * std
        if span == 0.0:
            span = max(abs(mean) * 1e-6, 1e-30)
        edges = np.linspace(mean - span, mean + span, bins + 1)
        counts, _ = np.histogram(values, bins=edges)
        return cls(per_ion=values, mean=mean, std=std,
                   min=float(values.min()), max=float(values.max()),
                   bin_edges=edges, counts=counts, label=label, unit=unit)

    def to_hz(self, clock_frequency):
        """Convert a fractional distribution to Hz."""
        if self.unit == "Hz":
            return self
        return ShiftDistribution.from_samples(
            self.per_ion * clock_frequency, self.label, unit="Hz")

    def summary(self) -> dict:
        return {
            "label": self.label,
            "unit": self.unit,
            "n": int(self.per_ion.size),
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
        }


def write_distribution_csv(dist: ShiftDistribution, positions, path):
    """Per-ion CSV: index, scaled coordinates, shift."""
    with open(path, "w") as fh:
        fh.write(f"# unit: {dist.unit}\n")
        fh.write("ion,x,y,z,shift\n")
        for i, (row, s) in enumerate(zip(positions, dist.per_ion)):
            fh.write(f"{i},{row[0]:.17g},{row[1]:.17g},{row[2]:.17g},"
                     f"{s:.17g}\n")


def write_histogram(dist: ShiftDistribution, path):
    """Two-column histogram file: bin center, count."""
    centers = 0.5 * (dist.bin_edges[:-1] + dist.bin_edges[1:])
    with open(path, "w") as fh:
        fh.write(f"# {dist.label} ({dist.unit}); columns: bin_center count\n")
        for c, k in zip(centers, dist.counts):
            fh.write(f"{c:.17g} {int(k)}\n")
