"""Free Gibbs Transport - State Package"""

from .ensemble_store import load_ensemble, save_ensemble
from .run_store import RunRecord, RunStore

__all__ = ["RunRecord", "RunStore", "load_ensemble", "save_ensemble"]
