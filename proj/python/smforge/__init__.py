from ._smforge import (
    AliasConflict,
    GatewayError,
    MetaError,
    MissingFile,
    ParseFailed,
    Scenario,
    StateMachine,
    evaluate,
    load_corpus,
    load_scenario,
    parse_umple,
    replay_bench,
    score_counts,
)

__all__ = [
    "AliasConflict",
    "GatewayError",
    "MetaError",
    "MissingFile",
    "ParseFailed",
    "Scenario",
    "StateMachine",
    "evaluate",
    "load_corpus",
    "load_scenario",
    "parse_umple",
    "replay_bench",
    "score_counts",
]
