from .check_result import CheckResult
from .choice_tables import ExpectedValueTable
from .efficiency_report import (
    LONG_FORMAT_COLUMNS,
    EfficiencyReport,
    RankingRegime,
)
from .errors import (
    ChoiceError,
    ConfigError,
    ConvergenceError,
    ParameterError,
    PopRankingError,
    RegimeError,
    RootFindingError,
    TieError,
)
from .experiment_config import ExperimentConfig, SweepAxis
from .limit_result import (
    Branch,
    ClosedForm,
    LimitResult,
    Root,
    Stability,
    ThetaParams,
)
from .ordinal_state import OrdinalState
from .params import (
    GroupConfig,
    ModelParams,
    SignalModel,
    ValidationReport,
)
from .realization import AgentSignals, InterimRealization
from .settings import Settings, load_parameter_file, read_config_file
from .trajectory import (
    FeedbackMode,
    PersistenceSchedule,
    ScheduleKind,
    TrajectoryRecord,
)
