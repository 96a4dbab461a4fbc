"""abperc: witness-based (AB) random geometric graphs and continuum
percolation at desk scale.

Subpackages follow the pipeline: `geometry` (closed forms and Monte Carlo
oracles), `pointprocess` (seeded Poisson sampling and spatial indexing),
`abgraph` (the four graph models), `observables` (isolation counts,
thresholds, crossings, vacancy, Poisson distance), `analysis` (analytic
bounds, word occurrence, coupling lattices), `harness` (experiments,
JSONL records, summaries) and `cli`.
"""

from . import geometry, pointprocess, abgraph, observables, analysis, harness

__all__ = ["geometry", "pointprocess", "abgraph", "observables", "analysis",
           "harness"]
__version__ = "0.1.0"
