"""
Classificadores binários implementados com numpy.

Todos expõem fit(X, y) e predict_proba(X) (probabilidade da classe 1). Depois de
treinados não mudam de estado, então podem ser compartilhados para previsão.
"""
import logging
import math

import numpy as np
from scipy.special import expit

from src.utils.paralelo import mapear
from src.utils.sementes import criar_gerador
from src.utils.validators import ValidationError

logger = logging.getLogger(__name__)


def _padronizar(X):
    media = X.mean(axis=0)
    desvio = X.std(axis=0)
    desvio[desvio == 0] = 1.0
    return media, desvio


class Modelo:
    n_features = None

    def fit(self, X, y):
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(int)

    def _verificar(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValidationError(f"Esperados {self.n_features} atributos, recebidos {X.shape[1]}")
        return X


class RegressaoLogistica(Modelo):
    """Descida de gradiente em lote na entropia cruzada com penalidade L2 opcional"""

    def __init__(self, learning_rate=0.1, epochs=1000, l2=0.0):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.coef_ = None
        self.intercept_ = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.n_features = X.shape[1]
        media, desvio = _padronizar(X)
        Xp = (X - media) / desvio

        w = np.zeros(self.n_features)
        b = 0.0
        for _ in range(self.epochs):
            erro = expit(Xp @ w + b) - y
            w -= self.learning_rate * (Xp.T @ erro / y.size + self.l2 * w)
            b -= self.learning_rate * erro.mean()

        # coeficientes na escala original
        self.coef_ = w / desvio
        self.intercept_ = b - float(np.sum(w * media / desvio))
        return self

    def decision_function(self, X) -> np.ndarray:
        return self._verificar(X) @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))


class No:
    def __init__(self, feature_index=None, threshold=None, left=None, right=None, value=None):
        self.feature_index = feature_index
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value  # fração da classe 1 na folha

    def is_leaf_node(self):
        return self.value is not None


class ArvoreDecisao(Modelo):
    """
    CART com impureza de Gini. Divisões de ganho zero são aceitas enquanto o nó
    for impuro. Empates: menor índice de atributo, depois menor limiar.
    """

    def __init__(self, max_depth=6, min_samples_split=2, max_features=None, rng=None):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.rng = rng
        self.root = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.n_features = X.shape[1]
        self.root = self._construir(X, y, 0)
        self.rng = None
        return self

    def _atributos(self):
        if self.max_features is None or self.max_features >= self.n_features:
            return np.arange(self.n_features)
        return np.sort(self.rng.choice(self.n_features, self.max_features, replace=False))

    def _construir(self, X, y, profundidade):
        uns = int(y.sum())
        if (profundidade >= self.max_depth or y.size < self.min_samples_split
                or uns == 0 or uns == y.size):
            return No(value=uns / y.size)

        atributo, limiar = self._melhor_divisao(X, y)
        if atributo is None:
            return No(value=uns / y.size)

        esquerda = X[:, atributo] <= limiar
        return No(
            feature_index=atributo,
            threshold=limiar,
            left=self._construir(X[esquerda], y[esquerda], profundidade + 1),
            right=self._construir(X[~esquerda], y[~esquerda], profundidade + 1),
        )

    def _melhor_divisao(self, X, y):
        n = y.size
        melhor, melhor_atributo, melhor_limiar = np.inf, None, None

        for f in self._atributos():
            ordem = np.argsort(X[:, f], kind="stable")
            xs, ys = X[ordem, f], y[ordem]

            validas = np.flatnonzero(xs[:-1] < xs[1:])
            if validas.size == 0:
                continue

            uns_esq = np.cumsum(ys)[validas].astype(float)
            n_esq = (validas + 1).astype(float)
            n_dir = n - n_esq
            uns_dir = ys.sum() - uns_esq

            impureza = (2.0 * uns_esq * (n_esq - uns_esq) / n_esq
                        + 2.0 * uns_dir * (n_dir - uns_dir) / n_dir) / n
            k = int(np.argmin(impureza))

            if impureza[k] < melhor:
                melhor = impureza[k]
                melhor_atributo = int(f)
                melhor_limiar = 0.5 * (xs[validas[k]] + xs[validas[k] + 1])

        return melhor_atributo, melhor_limiar

    def _prever(self, no, X, indices, saida):
        if no.is_leaf_node():
            saida[indices] = no.value
            return

        esquerda = X[indices, no.feature_index] <= no.threshold
        self._prever(no.left, X, indices[esquerda], saida)
        self._prever(no.right, X, indices[~esquerda], saida)

    def predict_proba(self, X) -> np.ndarray:
        X = self._verificar(X)
        saida = np.empty(X.shape[0])
        self._prever(self.root, X, np.arange(X.shape[0]), saida)
        return saida


def _treinar_arvore(tarefa):
    X, y, max_depth, min_samples_split, max_features, bootstrap, seed, indice = tarefa
    rng = criar_gerador(seed, indice)
    amostra = rng.integers(0, y.size, y.size) if bootstrap else np.arange(y.size)
    arvore = ArvoreDecisao(max_depth, min_samples_split, max_features, rng)
    return arvore.fit(X[amostra], y[amostra])


class FlorestaAleatoria(Modelo):
    """Bootstrap + subamostragem de √d atributos por nó; proba = média das árvores"""

    def __init__(self, n_trees=100, max_depth=6, min_samples_split=2, max_features="sqrt",
                 bootstrap=True, workers=1, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.workers = workers
        self.seed = seed
        self.trees = []

    def _n_atributos(self):
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(self.n_features)))
        return min(int(self.max_features), self.n_features)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.n_features = X.shape[1]

        tarefas = [(X, y, self.max_depth, self.min_samples_split, self._n_atributos(), self.bootstrap,
                    self.seed, t) for t in range(self.n_trees)]
        self.trees = mapear(_treinar_arvore, tarefas, self.workers)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = self._verificar(X)
        return np.mean([arvore.predict_proba(X) for arvore in self.trees], axis=0)


def loss_and_gradients(params: dict, X, y):
    """
    Entropia cruzada média da rede de uma camada oculta (ReLU, saída sigmoide)
    e seus gradientes analíticos.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size

    oculta = X @ params["W1"] + params["b1"]
    ativacao = np.maximum(oculta, 0.0)
    logito = ativacao @ params["W2"] + params["b2"][0]
    perda = float(np.mean(np.logaddexp(0.0, logito) - y * logito))

    d_logito = (expit(logito) - y) / n
    d_oculta = np.outer(d_logito, params["W2"]) * (oculta > 0)

    gradientes = {
        "W1": X.T @ d_oculta,
        "b1": d_oculta.sum(axis=0),
        "W2": ativacao.T @ d_logito,
        "b2": np.array([d_logito.sum()]),
    }
    return perda, gradientes


class RedeNeural(Modelo):
    """Uma camada oculta (ReLU), saída sigmoide, Adam em minilotes"""

    def __init__(self, hidden=32, epochs=200, learning_rate=0.01, batch_size=32, seed=0):
        self.hidden = hidden
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed
        self.params = None

    def inicializar(self, n_features: int, rng) -> dict:
        return {
            "W1": rng.standard_normal((n_features, self.hidden)) * math.sqrt(2.0 / n_features),
            "b1": np.zeros(self.hidden),
            "W2": rng.standard_normal(self.hidden) * math.sqrt(1.0 / self.hidden),
            "b2": np.zeros(1),
        }

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.n_features = X.shape[1]
        self.media, self.desvio = _padronizar(X)
        Xp = (X - self.media) / self.desvio

        rng = criar_gerador(self.seed)
        params = self.inicializar(self.n_features, rng)
        momento = {k: np.zeros_like(v) for k, v in params.items()}
        velocidade = {k: np.zeros_like(v) for k, v in params.items()}
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        passo = 0

        for _ in range(self.epochs):
            ordem = rng.permutation(y.size)
            for inicio in range(0, y.size, self.batch_size):
                lote = ordem[inicio:inicio + self.batch_size]
                _, gradientes = loss_and_gradients(params, Xp[lote], y[lote])
                passo += 1

                for k, g in gradientes.items():
                    momento[k] = beta1 * momento[k] + (1 - beta1) * g
                    velocidade[k] = beta2 * velocidade[k] + (1 - beta2) * g ** 2
                    m_hat = momento[k] / (1 - beta1 ** passo)
                    v_hat = velocidade[k] / (1 - beta2 ** passo)
                    params[k] = params[k] - self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

        self.params = params
        return self

    def predict_proba(self, X) -> np.ndarray:
        Xp = (self._verificar(X) - self.media) / self.desvio
        ativacao = np.maximum(Xp @ self.params["W1"] + self.params["b1"], 0.0)
        return expit(ativacao @ self.params["W2"] + self.params["b2"][0])
