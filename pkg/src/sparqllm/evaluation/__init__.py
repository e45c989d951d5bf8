from .generation import (
    EvalOutcome,
    EvalSample,
    GenerationReport,
    MatchReport,
    esr,
    hra,
    load_generation_dataset,
    rca,
    result_match,
    result_match_verbose,
    rmr,
    run_generation_eval,
)
from .retrieval import RetrievalSample, load_retrieval_dataset, run_retrieval_sweep
from .viz import VizSample, load_viz_dataset, run_viz_eval

__all__ = [
    "EvalOutcome", "EvalSample", "GenerationReport", "MatchReport",
    "esr", "hra", "rca", "rmr", "result_match", "result_match_verbose",
    "load_generation_dataset", "run_generation_eval",
    "RetrievalSample", "load_retrieval_dataset", "run_retrieval_sweep",
    "VizSample", "load_viz_dataset", "run_viz_eval",
]
