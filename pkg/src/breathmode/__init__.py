"""Breathing-mode frequencies of trapped few- and many-body systems from sum rules."""
from .errors import (BreathingModeError, ContinuationError, ConvergenceError, CutoffError,
                     DegenerateSystemError, DomainError, ResolutionError, SingularityError,
                     UnavailableError)
from .model import EnergyBreakdown, Engine, GroundStateResult, SpinPolicy, SystemSpec
from .sumrules import FrequencyEstimate, MomentSet, Variant, estimate_frequencies

__version__ = "0.1.0"
