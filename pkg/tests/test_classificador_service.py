import pytest

import numpy as np

from src.models.dados import ClassificationReport, ClassifierSpec, WindowFrame
from src.services.classificador_service import (
    ClassificadorService,
    criar_modelo,
    estimate_theta,
    tabela_texto
)
from src.services.classificadores import (
    ArvoreDecisao,
    FlorestaAleatoria,
    Modelo,
    RedeNeural,
    RegressaoLogistica
)
from src.utils.validators import TrainingError, ValidationError


class ModeloFixo(Modelo):
    """Modelo de teste que devolve probabilidades pré-definidas"""

    def __init__(self, proba):
        self.proba = np.asarray(proba, dtype=float)
        self.n_features = 1

    def fit(self, X, y):
        return self

    def predict_proba(self, X) -> np.ndarray:
        return self.proba


def _quadro(alvos, n=1):
    alvos = np.asarray(alvos)
    atributos = np.arange(alvos.size * n, dtype=float).reshape(-1, n)
    return WindowFrame(atributos, alvos, np.arange(alvos.size), "percent-changes", n, alvos.size + 2 * n)


@pytest.fixture
def service():
    return ClassificadorService()


class TestClassifierSpec:
    """Testes para ClassifierSpec"""

    def test_classificador_desconhecido(self):
        """Teste: apenas os quatro tipos"""
        with pytest.raises(ValidationError, match="desconhecido"):
            ClassifierSpec("svm")

    def test_hiperparametro_desconhecido(self):
        """Teste: chave fora do conjunto do tipo"""
        with pytest.raises(ValidationError, match="Hiperparâmetros desconhecidos"):
            ClassifierSpec("logistic", {"max_depth": 3})

    def test_hiperparametro_invalido(self):
        """Teste: valores são validados"""
        with pytest.raises(ValidationError):
            ClassifierSpec("decision-tree", {"min_samples_split": 1})

        with pytest.raises(ValidationError):
            ClassifierSpec("feedforward-net", {"learning_rate": 0.0})

    def test_params_mescla_padroes(self):
        """Teste: sobrescritas por cima dos padrões"""
        spec = ClassifierSpec("random-forest", {"n_trees": 5})
        assert spec.params["n_trees"] == 5
        assert spec.params["max_features"] == "sqrt"

    def test_criar_modelo(self):
        """Teste: cada tipo cria sua classe"""
        assert isinstance(criar_modelo(ClassifierSpec("logistic")), RegressaoLogistica)
        assert isinstance(criar_modelo(ClassifierSpec("decision-tree")), ArvoreDecisao)
        assert isinstance(criar_modelo(ClassifierSpec("random-forest", seed=3)), FlorestaAleatoria)
        assert isinstance(criar_modelo(ClassifierSpec("feedforward-net")), RedeNeural)


class TestTreino:
    """Testes para ClassificadorService.train"""

    def test_uma_classe(self, service):
        """Teste: treino com uma única classe é TrainingError"""
        with pytest.raises(TrainingError, match="única classe"):
            service.train(ClassifierSpec("logistic"), _quadro([1, 1, 1]))

    def test_quadro_vazio(self, service):
        """Teste: treino vazio é TrainingError"""
        vazio = _quadro([0, 1]).subset(np.array([False, False]))
        with pytest.raises(TrainingError, match="vazio"):
            service.train(ClassifierSpec("decision-tree"), vazio)

    def test_treina_e_preve(self, service):
        """Teste: árvore aprende um limiar e predict_proba aceita um vetor"""
        quadro = _quadro([0, 0, 0, 1, 1, 1])
        modelo = service.train(ClassifierSpec("decision-tree"), quadro)

        assert service.predict_proba(modelo, [0.0]) == 0.0
        assert service.predict_proba(modelo, [5.0]) == 1.0
        np.testing.assert_array_equal(service.predict_proba(modelo, [[0.0], [5.0]]), [0.0, 1.0])


class TestAvaliacao:
    """Testes para métricas e θ"""

    def test_identidades_das_metricas(self, service):
        """Teste: matriz de confusão, precisão, revocação, F1 e suporte"""
        quadro = _quadro([0, 0, 1, 1, 1])
        relatorio = service.evaluate(ModeloFixo([0.1, 0.9, 0.8, 0.7, 0.2]), quadro)

        assert relatorio.confusion_matrix.tolist() == [[1, 1], [1, 2]]
        assert relatorio.precision == pytest.approx({0: 0.5, 1: 2 / 3})
        assert relatorio.recall == pytest.approx({0: 0.5, 1: 2 / 3})
        assert relatorio.f1 == pytest.approx({0: 0.5, 1: 2 / 3})
        assert relatorio.support == {0: 2, 1: 3}
        assert relatorio.accuracy == pytest.approx(0.6)

    def test_classe_nunca_prevista(self):
        """Teste: precisão sem previsões é 0 e F1 também"""
        relatorio = ClassificationReport.from_confusion([[3, 0], [2, 0]])
        assert relatorio.precision[1] == 0.0
        assert relatorio.f1[1] == 0.0
        assert relatorio.recall[0] == 1.0

    def test_from_predictions(self):
        """Teste: pares verdade/previsão viram a mesma matriz que from_confusion recebe"""
        relatorio = ClassificationReport.from_predictions([0, 0, 1, 1, 1], [0, 1, 0, 1, 1])
        direto = ClassificationReport.from_confusion([[1, 1], [1, 2]])

        assert relatorio.to_dict() == direto.to_dict()
        assert relatorio.support == {0: 2, 1: 3}

    def test_from_predictions_vazio(self):
        """Teste: sem amostras não há métricas"""
        with pytest.raises(ValidationError, match="sem amostras"):
            ClassificationReport.from_predictions([], [])

    def test_teste_vazio(self, service):
        """Teste: avaliação sem linhas é rejeitada"""
        vazio = _quadro([0, 1]).subset(np.array([False, False]))
        with pytest.raises(ValidationError, match="vazio"):
            service.evaluate(ModeloFixo([]), vazio)

    def test_estimate_theta(self):
        """Teste: hard arredonda com 0.5 indo para 1; soft é a própria probabilidade"""
        assert estimate_theta(0.5) == 1.0
        assert estimate_theta(0.4999) == 0.0
        assert estimate_theta(0.3, mode="soft") == 0.3

        with pytest.raises(ValidationError):
            estimate_theta(1.2)

        with pytest.raises(ValidationError, match="Modo"):
            estimate_theta(0.3, mode="fuzzy")

    def test_theta_series(self, service):
        """Teste: um θ por linha"""
        quadro = _quadro([0, 1, 1])
        theta = service.theta_series(ModeloFixo([0.2, 0.5, 0.9]), quadro)
        assert theta.tolist() == [0.0, 1.0, 1.0]

    def test_tabela_texto(self, service):
        """Teste: uma coluna por modelo, uma linha por métrica e classe"""
        relatorio = service.evaluate(ModeloFixo([0.1, 0.9, 0.8, 0.7, 0.2]), _quadro([0, 0, 1, 1, 1]))
        tabela = tabela_texto({"logistic": relatorio, "decision-tree": relatorio})
        linhas = tabela.splitlines()

        assert len(linhas) == 9
        assert "logistic" in linhas[0] and "decision-tree" in linhas[0]
        assert linhas[1].startswith("precision θ=0")
        assert "0.50" in linhas[1]
        assert linhas[-1].split()[-1] == "3"
