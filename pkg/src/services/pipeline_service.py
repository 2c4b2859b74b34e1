"""
Pipeline de atributos: estatísticas da série, quadros escalonados de n dias com
alvos binários de regime, divisões T1/T2 e rebalanceamento do treino.
"""
import logging
from typing import NamedTuple

import numpy as np

from src.models.dados import PriceSeries, SplitSpec, WindowFrame
from src.models.dominio import DetectorConfig, InverseGaussianParams
from src.services.classificador_service import ClassificadorService
from src.services.levy_service import ig_fit
from src.services.teste_sequencial_service import TesteSequencialService
from src.utils.sementes import criar_gerador, derivar_semente
from src.utils.validators import RebalanceError, ValidadorNumerico, ValidationError

logger = logging.getLogger(__name__)

TIPOS_QUADRO = {"percent": "percent-changes", "ref": "right-exit-frequencies"}
# dias além de 3n exigidos pelo quadro de frequências
FOLGA_REF = 30


class ResultadoPipeline(NamedTuple):
    relatorios: dict  # {tipo: {classificador: ClassificationReport}}
    quadros: dict  # {tipo: WindowFrame}
    thetas: dict  # {tipo: {classificador: (start_indices, theta)}} no teste


def summary_stats(s: PriceSeries) -> dict:
    """Média, mediana, máximo e mínimo das variações diárias e percentuais"""
    if len(s) < 2:
        raise ValidationError("A série precisa de pelo menos 2 preços")

    def resumo(valores):
        return {"mean": float(np.mean(valores)), "median": float(np.median(valores)),
                "max": float(np.max(valores)), "min": float(np.min(valores))}

    return {"daily_change": resumo(s.changes()), "daily_percent_change": resumo(s.percent_changes())}


def histograma_inteiro(valores, maximo: int) -> list:
    """Pares (bin, count) para os inteiros 0..maximo"""
    contagens = np.bincount(np.asarray(valores, dtype=int), minlength=maximo + 1)
    return [(k, int(contagens[k])) for k in range(maximo + 1)]


def histograma_continuo(valores, n_bins: int = 50) -> list:
    """Pares (centro do bin, count)"""
    contagens, bordas = np.histogram(np.asarray(valores, dtype=float), bins=n_bins)
    centros = 0.5 * (bordas[:-1] + bordas[1:])
    return [(float(c), int(k)) for c, k in zip(centros, contagens)]


def right_exit_series(precos, nu: InverseGaussianParams, n: int, config: DetectorConfig, seed: int,
                      workers: int = 1):
    """
    b_j = saídas pela direita da janela precos[j : j+n+1], j = 0..L−n−1.
    Devolve (b, registros).
    """
    registros = TesteSequencialService(config, workers).detectar_janelas(precos, nu, n, seed)
    return np.array([r.right_exits for r in registros], dtype=int), registros


def build_percent_frame(s: PriceSeries, n: int, p_star: int, config: DetectorConfig,
                        nu: InverseGaussianParams, seed: int, workers: int = 1,
                        saidas=None) -> WindowFrame:
    """
    Linha i: variações percentuais pc[i : i+n]; alvo 1 se b[i+n] >= p*,
    isto é, se a próxima janela disjunta de n dias for de saltos grandes.
    """
    n = ValidadorNumerico.validar_inteiro_positivo("n", n, minimo=2)
    L = len(s)
    if L < 2 * n + 1:
        raise ValidationError(f"Série curta demais: são necessários {2 * n + 1} preços, há {L}")

    if saidas is None:
        saidas, _ = right_exit_series(s.closes, nu, n, config, seed, workers)

    pc = s.percent_changes()
    linhas = L - 2 * n
    atributos = np.array([pc[i:i + n] for i in range(linhas)])
    alvos = (saidas[n:n + linhas] >= p_star).astype(int)

    return WindowFrame(atributos, alvos, np.arange(linhas), "percent-changes", n, L)


def build_ref_frame(s: PriceSeries, n: int, p_star: int, config: DetectorConfig,
                    nu: InverseGaussianParams, seed: int, workers: int = 1,
                    saidas=None) -> WindowFrame:
    """
    Linha i: frequências b[i : i+n]; alvo 1 se b[i+2n−1] >= p*, a janela
    disjunta seguinte à última janela usada como atributo.
    """
    n = ValidadorNumerico.validar_inteiro_positivo("n", n, minimo=2)
    L = len(s)
    if L < 3 * n + FOLGA_REF:
        raise ValidationError(f"Série curta demais: são necessários {3 * n + FOLGA_REF} preços, há {L}")

    if saidas is None:
        saidas, _ = right_exit_series(s.closes, nu, n, config, seed, workers)

    linhas = L - 3 * n + 1
    atributos = np.array([saidas[i:i + n] for i in range(linhas)], dtype=float)
    alvos = (saidas[2 * n - 1:2 * n - 1 + linhas] >= p_star).astype(int)

    return WindowFrame(atributos, alvos, np.arange(linhas), "right-exit-frequencies", n, L)


def rebalance(frame: WindowFrame, ratio: float = 1.0, seed: int = 0) -> WindowFrame:
    """
    Remove linhas da classe majoritária ao acaso até maioria/minoria <= ratio.
    A ordem original das linhas é preservada.
    """
    ratio = ValidadorNumerico.validar_real("ratio", ratio)
    if ratio < 1:
        raise ValidationError("ratio deve ser pelo menos 1")

    contagem = frame.class_counts()
    if min(contagem.values()) == 0:
        raise RebalanceError("Rebalanceamento exige as duas classes no quadro")

    maioria = 0 if contagem[0] >= contagem[1] else 1
    minoria = 1 - maioria
    manter = min(contagem[maioria], int(np.floor(ratio * contagem[minoria])))

    if manter == contagem[maioria]:
        return frame

    indices_maioria = np.flatnonzero(frame.targets == maioria)
    escolhidos = criar_gerador(seed).choice(indices_maioria, size=manter, replace=False)

    mascara = frame.targets == minoria
    mascara[escolhidos] = True
    logger.info("Rebalanceamento: classe %d reduzida de %d para %d linhas", maioria, contagem[maioria], manter)
    return frame.subset(mascara)


def split(frame: WindowFrame, spec: SplitSpec):
    """Atribui linhas a treino/teste pelo índice inicial"""
    for nome, (inicio, fim) in (("treino", spec.train_range), ("teste", spec.test_range)):
        if fim >= frame.series_length:
            raise ValidationError(
                f"Faixa de {nome} [{inicio}, {fim}] fora da série de {frame.series_length} pontos"
            )

    def dentro(faixa):
        return (frame.start_indices >= faixa[0]) & (frame.start_indices <= faixa[1])

    return frame.subset(dentro(spec.train_range)), frame.subset(dentro(spec.test_range))


def ajustar_nu(s: PriceSeries, faixa) -> InverseGaussianParams:
    """ν ajustado às magnitudes das variações percentuais negativas com índice na faixa"""
    pc = s.percent_changes()
    trecho = pc[faixa[0]:faixa[1] + 1]
    return ig_fit(-trecho[trecho < 0])


class PipelineService:
    def __init__(self, config: DetectorConfig = None, n: int = 30, seed: int = 0, workers: int = 1):
        self.config = config or DetectorConfig()
        self.n = n
        self.seed = seed
        self.workers = workers
        self.classificador_service = ClassificadorService()

    def construir_quadros(self, s: PriceSeries, nu: InverseGaussianParams, tipos=("percent", "ref")) -> dict:
        """Quadros pedidos; as frequências b são calculadas uma vez e compartilhadas"""
        for tipo in tipos:
            if tipo not in TIPOS_QUADRO:
                raise ValidationError(f"Tipo de quadro desconhecido: {tipo}")

        saidas, _ = right_exit_series(s.closes, nu, self.n, self.config, self.seed, self.workers)
        construtores = {"percent": build_percent_frame, "ref": build_ref_frame}

        return {tipo: construtores[tipo](s, self.n, self.config.p_star, self.config, nu, self.seed,
                                         self.workers, saidas=saidas)
                for tipo in tipos}

    def executar(self, s: PriceSeries, divisao: SplitSpec, especificacoes, tipos=("percent", "ref"),
                 ratio: float = 1.0, theta_mode: str = "hard") -> ResultadoPipeline:
        """
        Para cada tipo de quadro e cada classificador: divide, rebalanceia o treino,
        treina, avalia e estima θ nas linhas de teste.
        """
        nu = ajustar_nu(s, divisao.train_range)
        logger.info("ν ajustado na faixa de treino: IG(%.4f, %.4f)", nu.mean, nu.scale)
        quadros = self.construir_quadros(s, nu, tipos)

        relatorios, thetas = {}, {}
        for k, (tipo, quadro) in enumerate(quadros.items()):
            treino, teste = split(quadro, divisao)
            treino = rebalance(treino, ratio, derivar_semente(self.seed, k))

            relatorios[tipo], thetas[tipo] = {}, {}
            for spec in especificacoes:
                modelo = self.classificador_service.train(spec, treino)
                relatorios[tipo][spec.kind] = self.classificador_service.evaluate(modelo, teste)
                thetas[tipo][spec.kind] = (
                    teste.start_indices, self.classificador_service.theta_series(modelo, teste, theta_mode)
                )

        return ResultadoPipeline(relatorios, quadros, thetas)
