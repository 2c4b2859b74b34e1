"""
Mapeamento ordenado em pool de processos.

A ordem dos resultados é sempre a ordem das tarefas, e cada tarefa carrega sua
própria semente derivada, então o resultado não depende do número de workers.
"""
import logging
from multiprocessing import Pool

logger = logging.getLogger(__name__)


def mapear(funcao, tarefas, workers: int = 1, chunksize: int = None) -> list:
    """
    Aplica `funcao` a cada tarefa. Com workers <= 1 roda no processo atual.
    `funcao` precisa ser definida no nível de módulo (picklable).
    """
    tarefas = list(tarefas)

    if workers is None or workers <= 1 or len(tarefas) <= 1:
        return [funcao(tarefa) for tarefa in tarefas]

    workers = min(int(workers), len(tarefas))
    if chunksize is None:
        chunksize = max(1, len(tarefas) // (4 * workers))

    logger.debug("Distribuindo %d tarefas em %d processos", len(tarefas), workers)
    with Pool(processes=workers) as pool:
        return pool.map(funcao, tarefas, chunksize=chunksize)
