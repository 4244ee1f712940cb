# MIT License

# Copyright (c) 2026 The popranking authors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

__version__ = "0.0.0+dev"

from .choice import expected_choice, expected_value_table, weighted_choice
from .core import (
    fix_realization,
    sample_agent_signals,
    sample_realization,
    uniform_ranking,
    validate,
)
from .dynamics import (
    integrate_ode,
    mean_dynamics_recursion,
    simulate,
    simulate_personalized,
)
from .limits import class_limit, solve_limit, solve_personalized_limit, theta
from .metrics import (
    belief_polarization,
    ex_ante_efficiency,
    interim_efficiency,
    net_of_aof,
    per,
    por,
)
from .models import (
    GroupConfig,
    InterimRealization,
    ModelParams,
    PersistenceSchedule,
    RankingRegime,
)
from .variants import merging_sweep, simulate_ordinal
