import logging

import numpy as np

from src.models.dados import ClassificationReport, ClassifierSpec, WindowFrame
from src.services.classificadores import (
    ArvoreDecisao,
    FlorestaAleatoria,
    Modelo,
    RedeNeural,
    RegressaoLogistica,
)
from src.utils.validators import TrainingError, ValidadorNumerico, ValidationError

logger = logging.getLogger(__name__)

MODOS_THETA = ("hard", "soft")
ROTULOS_TABELA = ("precision", "recall", "f1", "support")


def criar_modelo(spec: ClassifierSpec) -> Modelo:
    p = spec.params

    if spec.kind == "logistic":
        return RegressaoLogistica(p["learning_rate"], p["epochs"], p["l2"])
    if spec.kind == "decision-tree":
        return ArvoreDecisao(p["max_depth"], p["min_samples_split"])
    if spec.kind == "random-forest":
        return FlorestaAleatoria(p["n_trees"], p["max_depth"], p["min_samples_split"], p["max_features"],
                                 p["bootstrap"], p["workers"], spec.seed)
    return RedeNeural(p["hidden"], p["epochs"], p["learning_rate"], p["batch_size"], spec.seed)


def estimate_theta(proba: float, mode: str = "hard") -> float:
    """hard: arredonda para {0, 1} com 0.5 indo para 1; soft: a própria probabilidade"""
    proba = ValidadorNumerico.validar_intervalo("proba", proba, 0.0, 1.0)

    if mode not in MODOS_THETA:
        raise ValidationError(f"Modo de theta deve ser um de {MODOS_THETA}")

    if mode == "hard":
        return 1.0 if proba >= 0.5 else 0.0
    return proba


def tabela_texto(relatorios: dict) -> str:
    """Tabela alinhada: uma coluna por modelo, linhas métrica × classe θ"""
    nomes = list(relatorios)
    largura = max([12] + [len(nome) + 2 for nome in nomes])
    linhas = ["".ljust(18) + "".join(nome.rjust(largura) for nome in nomes)]

    for metrica in ROTULOS_TABELA:
        for classe in (0, 1):
            celulas = []
            for nome in nomes:
                valor = getattr(relatorios[nome], metrica)[classe]
                celulas.append((str(valor) if metrica == "support" else f"{valor:.2f}").rjust(largura))
            linhas.append(f"{metrica} θ={classe}".ljust(18) + "".join(celulas))

    return "\n".join(linhas)


class ClassificadorService:
    def train(self, spec: ClassifierSpec, frame: WindowFrame) -> Modelo:
        """Treina o classificador da especificação; exige as duas classes no quadro"""
        if len(frame) == 0:
            raise TrainingError("Quadro de treino vazio")

        contagem = frame.class_counts()
        if min(contagem.values()) == 0:
            raise TrainingError(f"Quadro de treino com uma única classe: {contagem}")

        logger.info("Treinando %s em %d linhas (%s)", spec.kind, len(frame), contagem)
        return criar_modelo(spec).fit(frame.features, frame.targets)

    def predict_proba(self, model: Modelo, features):
        """Probabilidade da classe 1; um vetor de atributos devolve um escalar"""
        atributos = np.asarray(features, dtype=float)
        proba = model.predict_proba(atributos)
        return float(proba[0]) if atributos.ndim == 1 else proba

    def evaluate(self, model: Modelo, frame: WindowFrame) -> ClassificationReport:
        if len(frame) == 0:
            raise ValidationError("Quadro de teste vazio")

        previsto = model.predict(frame.features)
        return ClassificationReport.from_predictions(frame.targets, previsto)

    def theta_series(self, model: Modelo, frame: WindowFrame, mode: str = "hard") -> np.ndarray:
        """θ estimado por linha do quadro"""
        return np.array([estimate_theta(p, mode) for p in model.predict_proba(frame.features)])
