from .validators import (
    ValidationError,
    DomainError,
    DivergenceError,
    FitError,
    IngestionError,
    ConfigError,
    RebalanceError,
    TrainingError,
    QuadratureError,
    BoundarySolveError,
    ValidadorNumerico,
    ValidadorAmostras,
    ValidadorSerie
)

__all__ = [
    'ValidationError',
    'DomainError',
    'DivergenceError',
    'FitError',
    'IngestionError',
    'ConfigError',
    'RebalanceError',
    'TrainingError',
    'QuadratureError',
    'BoundarySolveError',
    'ValidadorNumerico',
    'ValidadorAmostras',
    'ValidadorSerie'
]
