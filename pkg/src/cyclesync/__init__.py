"""Random-matrix analysis of business-cycle synchronisation in quarterly GDP panels."""

from .cluster import Dendrogram, agglomerate, correlation_distance, dissimilarity_rows, merge_order
from .errors import ConvergenceError, DataError
from .ingest import (
    Panel,
    QuarterlySeries,
    build_panel,
    log_growth,
    parse_csv,
    read_growth_csv,
    to_csv,
    yoy_growth,
)
from .rmt import (
    CorrelationMatrix,
    EigenSystem,
    MPBand,
    classify_modes,
    correlation,
    eigen,
    ipr,
    market_fraction,
    mp_band,
    mp_cdf,
    mp_density,
    participation_ratio,
)
from .rolling import WindowResult, rolling_analysis, summarize_fractions
from .stats import KSResult, SpectrumEstimate, ks_two_sample, mp_monte_carlo, periodogram

__version__ = "0.1.0"
