"""Outage analysis for wireless-powered uplink networks.

Energy outage (closed form and Monte Carlo) for CSI-based and CSI-free
powering, ZF/MMSE information outage, pilot planning for random access and
a max-min energy beamformer.
"""

from .bench import OutageBreakdown, ScenarioConfig, overall_outage, run_sweep
from .beamforming import Precoder, mrt_precoder, solve_fair_beamforming
from .numerics import DiscreteExp, NoncentralChi2, marcum_q, nc_chi2_cdf, trial_rng
from .pilots import PilotPlan, collision_probability, optimal_pilot_count
from .scenario import Deployment, SystemParams, ring_deployment
from .wet import Scheme, energy_outage_periodic, energy_outage_poisson
from .wit import Equalizer, info_outage_periodic, info_outage_poisson

__version__ = "0.1.0"
