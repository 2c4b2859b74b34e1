import pytest
import os
import tempfile

import numpy as np

from src.models import Execucao, RegistroJanela, ResultadoEstudo
from src.models.dominio import DetectorConfig, InverseGaussianParams
from src.repositories.database import DatabaseConfig
from src.services.estudo_simulacao_service import generate_fixture
from src.services.resultado_service import ResultadoService


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: estudo completo com a configuração padrão (-m \"not slow\" para pular)")


@pytest.fixture(scope="session")
def test_database():
    """
    Fixture que cria um banco de dados temporário para os testes
    Escopo 'session' = criado uma vez para toda a sessão de testes
    """
    db_fd, db_path = tempfile.mkstemp(suffix='.db')
    database_url = f"sqlite:///{db_path}"

    test_db_config = DatabaseConfig(database_url)
    test_db_config.create_tables()

    yield test_db_config

    # Cleanup - fechar todas as conexões antes de remover arquivo
    try:
        test_db_config.engine.dispose()
        os.close(db_fd)
        os.unlink(db_path)
    except (OSError, PermissionError):
        # No Windows, às vezes o arquivo ainda está em uso
        pass


@pytest.fixture(scope="function")
def clean_database(test_database):
    """
    Fixture que limpa o banco antes de cada teste
    """
    session = test_database.get_session()
    try:
        # ordem das chaves estrangeiras
        session.query(RegistroJanela).delete()
        session.query(ResultadoEstudo).delete()
        session.query(Execucao).delete()
        session.commit()
    except Exception:
        session.rollback()
    finally:
        session.close()

    yield test_database


@pytest.fixture
def resultado_service(clean_database):
    """
    Fixture que cria uma instância do ResultadoService com banco limpo
    """
    service = ResultadoService()
    original_db_config = service.db_config
    service.db_config = clean_database

    yield service

    service.db_config = original_db_config


@pytest.fixture
def ig_padrao():
    """IG(1, 1): medida de saltos das classes do estudo"""
    return InverseGaussianParams(mean=1.0, scale=1.0)


@pytest.fixture
def detector_rapido():
    """Detector com horizonte curto para manter os testes rápidos"""
    return DetectorConfig(n_sims=10, p_star=8, t_max=2.0, dt=1e-2)


@pytest.fixture(scope="session")
def serie_fixture():
    """Série sintética longa de 2530 pontos (determinística)"""
    return generate_fixture(seed=2009)


@pytest.fixture(scope="session")
def serie_curta():
    """Trecho curto com o mesmo gerador, para os testes do pipeline"""
    return generate_fixture(seed=7, length=160)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def csv_precos(tmp_path, serie_curta):
    """CSV date,close com a série curta (fora de ordem, para testar a ordenação)"""
    caminho = tmp_path / "precos.csv"
    linhas = ["date,close"]
    for data, fechamento in reversed(list(zip(serie_curta.dates, serie_curta.closes))):
        linhas.append(f"{data.isoformat()},{float(fechamento)!r}")
    caminho.write_text("\n".join(linhas) + "\n", encoding="utf-8")
    return caminho
