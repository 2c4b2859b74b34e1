"""
Estudo de simulação: quatro classes de processos de Lévy (treino, controle,
saltos grandes óbvios e sutis) pontuadas pelo detector e pela linha de base ingênua.
"""
import logging
from datetime import date

import numpy as np
import pandas as pd

from src.models.dados import PriceSeries
from src.models.dominio import DetectorConfig, InverseGaussianParams, StudyReport, StudyRow, StudySpec
from src.services.levy_service import amostrar_inclinada, ig_fit
from src.services.teste_sequencial_service import detect, naive_classify, saltos_negativos
from src.utils.paralelo import mapear
from src.utils.sementes import criar_gerador, derivar_semente, validar_semente
from src.utils.validators import ValidadorNumerico, ValidationError

logger = logging.getLogger(__name__)

IG_PADRAO = InverseGaussianParams(mean=1.0, scale=1.0)
CLASSES_TESTE = ("control", "obvious", "subtle")
CLASSES = ("training",) + CLASSES_TESTE + ("fixture",)
ROTULO_ESPERADO = {"control": 0, "obvious": 1, "subtle": 1}
TENTATIVAS = 100

TAMANHO_FIXTURE = 2530
INICIO_FIXTURE = date(2009, 6, 1)
BLOCO_REGIME = 30
PROB_REGIME_GRANDE = 0.2


def especificacao_classe(classe: str, n_processes: int = 100, jump_rate: float = 1.0) -> StudySpec:
    """Especificações padrão: deriva 1, difusão 0.5, saltos IG(1, 1), início em 100"""
    base = dict(drift=1.0, diffusion=0.5, jump_params=IG_PADRAO, start_value=100.0, jump_rate=jump_rate)

    if classe == "training":
        return StudySpec(**base, n_processes=1, n_periods_each=500)
    if classe == "control":
        return StudySpec(**base, n_processes=n_processes, n_periods_each=30)
    if classe == "obvious":
        return StudySpec(**base, tilt=1.0, n_processes=n_processes, n_periods_each=30)
    if classe == "subtle":
        return StudySpec(**{**base, "drift": 3.0}, tilt=1.0, n_processes=n_processes, n_periods_each=30)

    raise ValidationError(f"Classe desconhecida: {classe}")


def _incrementos(rng, spec: StudySpec, n: int) -> np.ndarray:
    """n incrementos de um período: deriva + difusão − saltos Poisson(taxa_saltos)"""
    contagens = rng.poisson(spec.taxa_saltos, n)
    saltos = amostrar_inclinada(rng, spec.tilt, spec.jump_params, int(contagens.sum()))
    soma_saltos = np.bincount(np.repeat(np.arange(n), contagens), weights=saltos, minlength=n)
    return spec.drift + spec.diffusion * rng.standard_normal(n) - soma_saltos


def _caminho(spec: StudySpec, seed: int, processo: int) -> np.ndarray:
    """
    Um caminho com n_periods_each pontos (o primeiro é start_value).
    Caminhos aditivos que cruzam zero são sorteados de novo num fluxo derivado.
    """
    n = spec.n_periods_each - 1

    for tentativa in range(TENTATIVAS):
        rng = criar_gerador(seed, processo, tentativa)
        incrementos = _incrementos(rng, spec, n)

        if spec.compounding == "percent":
            fatores = 1.0 + incrementos / 100.0
            if np.all(fatores > 0):
                return spec.start_value * np.concatenate([[1.0], np.cumprod(fatores)])
        else:
            caminho = spec.start_value + np.concatenate([[0.0], np.cumsum(incrementos)])
            if np.all(caminho > 0):
                return caminho

        logger.warning("Processo %d cruzou zero; novo sorteio (tentativa %d)", processo, tentativa + 1)

    raise ValidationError(f"Processo {processo} não ficou positivo após {TENTATIVAS} tentativas")


def generate_class(spec: StudySpec, seed: int) -> list:
    """n_processes caminhos de preço, cada um com fluxo derivado de (seed, processo)"""
    seed = validar_semente(seed)
    return [_caminho(spec, seed, processo) for processo in range(spec.n_processes)]


def generate_fixture(seed: int, length: int = TAMANHO_FIXTURE, prob_grande: float = PROB_REGIME_GRANDE,
                     bloco: int = BLOCO_REGIME) -> PriceSeries:
    """
    Série sintética longa com composição percentual e datas úteis desde 2009-06-01.
    Blocos de `bloco` dias alternam entre o regime de controle e o de saltos
    grandes da classe sutil (inclinação 1, deriva 3) com probabilidade `prob_grande`.
    """
    seed = validar_semente(seed)
    length = ValidadorNumerico.validar_inteiro_positivo("length", length, minimo=2)
    ValidadorNumerico.validar_intervalo("prob_grande", prob_grande, 0.0, 1.0)

    controle = especificacao_classe("control")
    grande_spec = especificacao_classe("subtle")
    n_blocos = int(np.ceil((length - 1) / bloco))
    regimes = criar_gerador(seed, 0).random(n_blocos) < prob_grande

    fatores = []
    for indice, grande in enumerate(regimes):
        rng = criar_gerador(seed, 1, indice)
        incrementos = _incrementos(rng, grande_spec if grande else controle, bloco)
        fatores.append(np.maximum(1.0 + incrementos / 100.0, 1e-6))

    fatores = np.concatenate(fatores)[:length - 1]
    fechamentos = controle.start_value * np.concatenate([[1.0], np.cumprod(fatores)])
    datas = [d.date() for d in pd.bdate_range(start=INICIO_FIXTURE, periods=length)]

    return PriceSeries(dates=datas, closes=fechamentos)


def _pontuar_processo(tarefa):
    caminho, nu, saltos_treino, config, semente, esperado = tarefa
    registro = detect(caminho, nu, seed=semente, config=config)
    saltos = saltos_negativos(caminho)
    ingenuo = naive_classify(saltos, saltos_treino) if saltos.size else 0
    return int(registro.label == esperado), int(ingenuo == esperado)


class EstudoSimulacaoService:
    def __init__(self, config: DetectorConfig = None, n_processes: int = 100, jump_rate: float = 1.0,
                 workers: int = 1):
        self.config = config or DetectorConfig()
        self.n_processes = ValidadorNumerico.validar_inteiro_positivo("n_processes", n_processes)
        self.jump_rate = jump_rate
        self.workers = workers

    def especificacao(self, classe: str) -> StudySpec:
        return especificacao_classe(classe, self.n_processes, self.jump_rate)

    def gerar(self, classe: str, semente: int) -> list:
        """Caminhos de uma classe; a classe `fixture` devolve a série longa"""
        if classe == "fixture":
            return [generate_fixture(semente).closes]

        indice = CLASSES.index(classe)
        return generate_class(self.especificacao(classe), derivar_semente(semente, indice))

    def run_study(self, seeds, p_star: int = None, alpha0: float = None) -> StudyReport:
        """
        Para cada semente: ajusta ν no treino, roda detector e linha de base em
        cada processo das classes de teste e conta os acertos.
        """
        config = self.config
        mudancas = {k: v for k, v in (("p_star", p_star), ("alpha0", alpha0)) if v is not None}
        if mudancas:
            config = config.com(**mudancas)

        relatorio = StudyReport()
        for semente in seeds:
            semente = validar_semente(semente)
            treino = self.gerar("training", semente)[0]
            saltos_treino = saltos_negativos(treino)
            nu = ig_fit(saltos_treino)
            logger.info("Semente %d: ν ajustado no treino = IG(%.4f, %.4f)", semente, nu.mean, nu.scale)

            for classe in CLASSES_TESTE:
                caminhos = self.gerar(classe, semente)
                indice = CLASSES.index(classe)
                tarefas = [(caminho, nu, saltos_treino, config, derivar_semente(semente, indice, k),
                            ROTULO_ESPERADO[classe]) for k, caminho in enumerate(caminhos)]
                acertos = np.array(mapear(_pontuar_processo, tarefas, self.workers))

                relatorio.rows.append(StudyRow(classe, "detector", int(acertos[:, 0].sum()), len(caminhos), semente))
                relatorio.rows.append(StudyRow(classe, "naive", int(acertos[:, 1].sum()), len(caminhos), semente))
                logger.info("Classe %s: detector %d/%d, ingênuo %d/%d", classe,
                            acertos[:, 0].sum(), len(caminhos), acertos[:, 1].sum(), len(caminhos))

        return relatorio
