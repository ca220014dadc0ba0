"""Polyconvex neural additive models distilled into closed-form hyperelastic energies."""

from .analysis import AnalysisVerdict, analyze_pair, asymptotic_class, check_interval, coercivity_check, stress_free_check
from .kinematics import LoadingMode, alpha0_of, mode_invariants, reduced_stress, second_pk_general
from .pnam import BaselineMlp, PnamModel
from .training import StressSample, TrainConfig, loss, loss_gradients, predict_stress, r2_by_mode, train

__version__ = "0.1.0"
