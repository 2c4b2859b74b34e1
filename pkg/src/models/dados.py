"""
Tipos de dados do pipeline de atributos e da classificação.
"""
from dataclasses import dataclass, field
from datetime import date
from typing import List, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from src.utils.validators import ValidadorNumerico, ValidationError

TIPOS_ATRIBUTO = ("percent-changes", "right-exit-frequencies")
TIPOS_CLASSIFICADOR = ("logistic", "decision-tree", "random-forest", "feedforward-net")
ROTULOS = [0, 1]

HIPERPARAMETROS_PADRAO = {
    "logistic": {"learning_rate": 0.1, "epochs": 1000, "l2": 0.0},
    "decision-tree": {"max_depth": 6, "min_samples_split": 2},
    "random-forest": {"n_trees": 100, "max_depth": 6, "min_samples_split": 2,
                      "max_features": "sqrt", "bootstrap": True, "workers": 1},
    "feedforward-net": {"hidden": 32, "epochs": 200, "learning_rate": 0.01, "batch_size": 32},
}


@dataclass(eq=False)
class PriceSeries:
    dates: List[date]
    closes: np.ndarray

    def __post_init__(self):
        self.closes = np.asarray(self.closes, dtype=float)

        if len(self.dates) != self.closes.size:
            raise ValidationError("Datas e fechamentos devem ter o mesmo tamanho")

        if np.any(self.closes <= 0):
            raise ValidationError("Todos os fechamentos devem ser positivos")

        for anterior, atual in zip(self.dates, self.dates[1:]):
            if atual <= anterior:
                raise ValidationError("Datas devem ser estritamente crescentes")

    def __len__(self):
        return self.closes.size

    @property
    def index(self) -> np.ndarray:
        return np.arange(len(self))

    def changes(self) -> np.ndarray:
        return np.diff(self.closes)

    def percent_changes(self) -> np.ndarray:
        return percent_changes(self.closes)


def percent_changes(precos) -> np.ndarray:
    """Variações percentuais diárias: 100·(p_{k+1} − p_k)/p_k"""
    precos = np.asarray(precos, dtype=float)
    return 100.0 * np.diff(precos) / precos[:-1]


@dataclass(eq=False)
class WindowFrame:
    """
    Quadro escalonado: a linha k tem n atributos, alvo binário e índice inicial.
    Linhas consecutivas começam em índices consecutivos.
    """
    features: np.ndarray
    targets: np.ndarray
    start_indices: np.ndarray
    feature_kind: str
    n: int
    series_length: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float).reshape(-1, self.n)
        self.targets = np.asarray(self.targets, dtype=int)
        self.start_indices = np.asarray(self.start_indices, dtype=int)

        if self.feature_kind not in TIPOS_ATRIBUTO:
            raise ValidationError(f"Tipo de atributo desconhecido: {self.feature_kind}")

        if not (self.features.shape[0] == self.targets.size == self.start_indices.size):
            raise ValidationError("Atributos, alvos e índices devem ter o mesmo número de linhas")

    def __len__(self):
        return self.targets.size

    @property
    def rows(self) -> List[Tuple[np.ndarray, int, int]]:
        return [(self.features[k], int(self.targets[k]), int(self.start_indices[k]))
                for k in range(len(self))]

    def class_counts(self) -> dict:
        return {0: int(np.sum(self.targets == 0)), 1: int(np.sum(self.targets == 1))}

    def subset(self, mascara) -> "WindowFrame":
        return WindowFrame(self.features[mascara], self.targets[mascara], self.start_indices[mascara],
                           self.feature_kind, self.n, self.series_length)

    def to_dataframe(self) -> pd.DataFrame:
        dados = pd.DataFrame(self.features, columns=[f"f{k}" for k in range(self.n)])
        dados["target"] = self.targets
        dados["start_index"] = self.start_indices
        return dados


@dataclass(frozen=True)
class SplitSpec:
    """Faixas de índices iniciais (inclusivas) para treino e teste"""
    train_range: Tuple[int, int]
    test_range: Tuple[int, int]

    def __post_init__(self):
        for nome, faixa in (("treino", self.train_range), ("teste", self.test_range)):
            if len(faixa) != 2 or faixa[0] < 0 or faixa[1] < faixa[0]:
                raise ValidationError(f"Faixa de {nome} inválida: {faixa}")

        treino, teste = self.train_range, self.test_range
        if not (treino[1] < teste[0] or teste[1] < treino[0]):
            raise ValidationError("Faixas de treino e teste não podem se sobrepor")

    @classmethod
    def predefinido(cls, nome: str) -> "SplitSpec":
        divisoes = {
            "T1": cls((100, 1000), (2000, 2500)),
            "T2": cls((50, 1500), (1600, 2450)),
        }
        if nome not in divisoes:
            raise ValidationError(f"Divisão predefinida desconhecida: {nome}")
        return divisoes[nome]


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in TIPOS_CLASSIFICADOR:
            raise ValidationError(f"Classificador desconhecido: {self.kind}")

        desconhecidos = set(self.hyperparameters) - set(HIPERPARAMETROS_PADRAO[self.kind])
        if desconhecidos:
            raise ValidationError(f"Hiperparâmetros desconhecidos para {self.kind}: {sorted(desconhecidos)}")

        p = self.params
        if "max_depth" in p:
            ValidadorNumerico.validar_inteiro_positivo("max_depth", p["max_depth"])
        if "min_samples_split" in p:
            ValidadorNumerico.validar_inteiro_positivo("min_samples_split", p["min_samples_split"], minimo=2)
        if "n_trees" in p:
            ValidadorNumerico.validar_inteiro_positivo("n_trees", p["n_trees"])
        if "epochs" in p:
            ValidadorNumerico.validar_inteiro_positivo("epochs", p["epochs"])
        if "learning_rate" in p:
            ValidadorNumerico.validar_positivo("learning_rate", p["learning_rate"])
        if "hidden" in p:
            ValidadorNumerico.validar_inteiro_positivo("hidden", p["hidden"])
        if "batch_size" in p:
            ValidadorNumerico.validar_inteiro_positivo("batch_size", p["batch_size"])
        if "l2" in p:
            ValidadorNumerico.validar_nao_negativo("l2", p["l2"])
        if "max_features" in p and p["max_features"] != "sqrt":
            ValidadorNumerico.validar_inteiro_positivo("max_features", p["max_features"])

    @property
    def params(self) -> dict:
        combinados = dict(HIPERPARAMETROS_PADRAO[self.kind])
        combinados.update(self.hyperparameters)
        return combinados


@dataclass(eq=False)
class ClassificationReport:
    """
    Métricas por classe e matriz de confusão (linhas = verdade, colunas = previsão).
    """
    precision: dict
    recall: dict
    f1: dict
    support: dict
    confusion_matrix: np.ndarray

    @classmethod
    def from_predictions(cls, verdade, previsto) -> "ClassificationReport":
        verdade = np.asarray(verdade, dtype=int)
        previsto = np.asarray(previsto, dtype=int)
        if verdade.size == 0:
            raise ValidationError("Avaliação sem amostras")

        matriz = confusion_matrix(verdade, previsto, labels=ROTULOS)
        precisao, revocacao, f1, suporte = precision_recall_fscore_support(
            verdade, previsto, labels=ROTULOS, zero_division=0
        )

        def por_classe(valores, tipo=float):
            return {c: tipo(v) for c, v in zip(ROTULOS, valores)}

        return cls(por_classe(precisao), por_classe(revocacao), por_classe(f1), por_classe(suporte, int), matriz)

    @classmethod
    def from_confusion(cls, matriz) -> "ClassificationReport":
        """Reconstrói os pares (verdade, previsão) de uma matriz 2×2"""
        contagens = np.asarray(matriz, dtype=int).reshape(2, 2).ravel()
        return cls.from_predictions(np.repeat([0, 0, 1, 1], contagens), np.repeat([0, 1, 0, 1], contagens))

    @property
    def accuracy(self) -> float:
        total = int(self.confusion_matrix.sum())
        return float(np.trace(self.confusion_matrix)) / total if total else 0.0

    def to_dict(self) -> dict:
        return {
            "precision": {str(c): v for c, v in self.precision.items()},
            "recall": {str(c): v for c, v in self.recall.items()},
            "f1": {str(c): v for c, v in self.f1.items()},
            "support": {str(c): v for c, v in self.support.items()},
            "confusion_matrix": self.confusion_matrix.tolist(),
        }
