from .teste_sequencial_service import TesteSequencialService
from .estudo_simulacao_service import EstudoSimulacaoService
from .pipeline_service import PipelineService
from .classificador_service import ClassificadorService
from .resultado_service import ResultadoService

__all__ = [
    'TesteSequencialService',
    'EstudoSimulacaoService',
    'PipelineService',
    'ClassificadorService',
    'ResultadoService'
]
