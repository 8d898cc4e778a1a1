"""Hidden optionality of American options under stochastic funding and carry rates."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CalibrationError,
    ConfigError,
    FugitlabError,
    InputError,
    LatticeError,
    NoExerciseSupportError,
    QuadratureError,
    StageError,
)
from .european import EuropeanPrice, price_european_closed, stochastic_european  # noqa: E402
from .fugit import (  # noqa: E402
    FugitSummary,
    StoppingDistribution,
    expected_fugit,
    omega_heuristic,
    stopping_distribution,
)
from .lattice import (  # noqa: E402
    Kind,
    LatticeConfig,
    LatticeResult,
    OptionSpec,
    price_american,
    price_batch,
    price_european_lattice,
    rho,
)
from .optionality import OptionalityReport, analyze, pi_a, pi_a2, pi_delta_a  # noqa: E402
from .quadrature import (  # noqa: E402
    QuadratureRule,
    StochasticPriceResult,
    gauss_hermite,
    integrate_full_distribution,
    integrate_single_fugit,
    integrate_two_rates,
)
from .rates import MarginalLaw, RateModel, Variant, calibrate, marginal_at, mean_at  # noqa: E402
