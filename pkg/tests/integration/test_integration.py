import pytest
import json
from dataclasses import fields

import numpy as np
import pandas as pd

from main import main
from src.repositories.arquivos import write_series_csv
from src.services import pipeline_service
from src.services.estudo_simulacao_service import generate_fixture
from src.utils.config import HIPERPARAMETROS, RunConfig


@pytest.fixture
def cli(tmp_path, monkeypatch):
    """
    Ambiente isolado para o CLI: diretório próprio, sem chaves no ambiente e um
    arquivo de configuração com detector de horizonte curto.
    """
    chaves = [campo.name.upper() for campo in fields(RunConfig)]
    chaves += [f"{prefixo}_{nome.upper()}" for prefixo, (_, conversores) in HIPERPARAMETROS.items()
               for nome in conversores]
    for chave in chaves:
        monkeypatch.delenv(chave, raising=False)
    monkeypatch.chdir(tmp_path)

    config = tmp_path / "run.env"
    config.write_text("\n".join([
        "WINDOW_LENGTH=5",
        "T_MAX=2",
        "DT=0.01",
        "N_PROCESSES=2",
        "TRAIN_RANGE=0-80",
        "TEST_RANGE=90-140",
        "CLASSIFIERS=logistic,decision-tree",
        "LR_EPOCHS=50",
        "DT_MAX_DEPTH=3",
    ]) + "\n", encoding="utf-8")

    saida = tmp_path / "saida"

    def executar(*argumentos):
        return main([*argumentos, "--config", str(config), "--output-dir", str(saida)])

    executar.saida = saida
    executar.tmp_path = tmp_path
    return executar


@pytest.fixture
def csv_curto(tmp_path):
    """Série de 40 preços para o detector por janela"""
    return write_series_csv(generate_fixture(seed=5, length=40), tmp_path / "curto.csv")


class TestIntegracaoCli:
    """
    Testes de integração que executam os subcomandos de ponta a ponta
    pela função main, como o usuário faria na linha de comando
    """

    def test_stats(self, cli, csv_precos):
        """
        Teste de integração: stats
        1. Lê o CSV fora de ordem
        2. Grava resumo, histogramas e a configuração efetiva
        """
        assert cli("stats", str(csv_precos)) == 0

        resumo = json.loads((cli.saida / "summary_stats.json").read_text(encoding="utf-8"))
        assert set(resumo["summary"]) == {"daily_change", "daily_percent_change"}
        assert (cli.saida / "daily_percent_change_histogram.csv").is_file()

        efetiva = json.loads((cli.saida / "effective_config.json").read_text(encoding="utf-8"))
        assert efetiva["window_length"] == 5
        assert efetiva["t_max"] == 2.0

    def test_detect(self, cli, csv_curto):
        """
        Teste de integração: detect
        1. Ajusta ν na série inteira
        2. Um registro por janela de 5 variações
        3. Histograma de saídas pela direita com bins 0..n_sims
        """
        assert cli("detect", str(csv_curto), "--seed", "3") == 0

        dados = json.loads((cli.saida / "detect_records.json").read_text(encoding="utf-8"))
        assert len(dados["records"]) == 35
        assert dados["nu"]["mean"] > 0
        assert dados["config"]["seed"] == 3

        registro = dados["records"][0]
        assert registro["right_exits"] + registro["left_exits"] + registro["no_exits"] == 10
        assert registro["label"] == int(registro["right_exits"] >= 8)

        histograma = pd.read_csv(cli.saida / "right_exit_histogram.csv")
        assert histograma["bin"].tolist() == list(range(11))
        assert histograma["count"].sum() == 35

    def test_detect_deterministico(self, cli, csv_curto):
        """Teste de integração: mesma semente, mesmos registros"""
        assert cli("detect", str(csv_curto), "--seed", "9") == 0
        primeira = (cli.saida / "detect_records.csv").read_text(encoding="utf-8")

        assert cli("detect", str(csv_curto), "--seed", "9", "--workers", "2") == 0
        assert (cli.saida / "detect_records.csv").read_text(encoding="utf-8") == primeira

    def test_erros_de_validacao(self, cli, csv_curto, capsys):
        """
        Teste de integração: erros de validação saem com código 2
        1. p* acima de n_sims
        2. CSV inexistente
        3. α0 fora de (0, 1)
        """
        assert cli("detect", str(csv_curto), "--p-star", "11") == 2
        assert "✗" in capsys.readouterr().out

        assert cli("detect", str(cli.tmp_path / "nada.csv")) == 2
        assert cli("stats", str(csv_curto), "--alpha0", "0") == 2

    def test_serie_menor_que_a_janela(self, cli, csv_curto):
        """Teste de integração: janela maior que a série"""
        assert cli("detect", str(csv_curto), "--window-length", "60") == 2

    def test_simulate(self, cli):
        """
        Teste de integração: simulate
        1. Classe de controle: um CSV por processo
        2. Fixture: série de 2530 pontos
        """
        assert cli("simulate", "--class", "control", "--n-processes", "3") == 0

        arquivos = sorted((cli.saida / "control").glob("control_*.csv"))
        assert [a.name for a in arquivos] == ["control_000.csv", "control_001.csv", "control_002.csv"]
        assert len(pd.read_csv(arquivos[0])) == 30

        assert cli("simulate", "--class", "fixture", "--seed", "2009") == 0
        fixture = pd.read_csv(cli.saida / "fixture.csv")
        assert len(fixture) == 2530
        assert fixture["date"].iloc[0] == "2009-06-01"

    def test_study(self, cli):
        """Teste de integração: relatório do estudo com seis linhas por semente"""
        assert cli("study", "--seeds", "1") == 0

        relatorio = json.loads((cli.saida / "study_report.json").read_text(encoding="utf-8"))
        assert len(relatorio["rows"]) == 6
        for linha in relatorio["rows"]:
            assert linha["total"] == 2
            assert 0 <= linha["correct"] <= 2

    def test_pipeline(self, cli, csv_precos, monkeypatch):
        """
        Teste de integração: pipeline com frequências sintéticas
        1. Dois quadros e dois classificadores
        2. Quadros, θ por classificador e relatórios gravados
        """
        def falso(precos, nu, n, config, seed, workers=1):
            return np.where((np.arange(len(precos) - n) // 3) % 2 == 0, 10, 2), []

        monkeypatch.setattr(pipeline_service, "right_exit_series", falso)

        assert cli("pipeline", str(csv_precos)) == 0

        for nome in ("frame_percent.csv", "frame_ref.csv", "theta_percent_logistic.csv",
                     "theta_ref_decision-tree.csv", "pipeline_reports.txt"):
            assert (cli.saida / nome).is_file()

        relatorios = json.loads((cli.saida / "pipeline_reports.json").read_text(encoding="utf-8"))
        assert set(relatorios["reports"]) == {"percent", "ref"}
        assert set(relatorios["reports"]["ref"]) == {"logistic", "decision-tree"}

        theta = pd.read_csv(cli.saida / "theta_percent_logistic.csv")
        assert theta["start_index"].tolist() == list(range(90, 141))

    def test_bns(self, cli):
        """
        Teste de integração: bns nos três modos
        1. paths: formato longo
        2. correlation: fórmula e amostral
        3. laplace: faixa de convergência e Monte Carlo
        """
        assert cli("bns", "--mode", "paths", "--n-paths", "5", "--steps", "10") == 0
        assert len(pd.read_csv(cli.saida / "bns_paths.csv")) == 5 * 11

        assert cli("bns", "--mode", "correlation", "--n-paths", "50", "--steps", "20") == 0
        correlacao = json.loads((cli.saida / "bns_correlation.json").read_text(encoding="utf-8"))
        assert -1.0 <= correlacao["monte_carlo"] <= 1.0

        assert cli("bns", "--mode", "laplace", "--n-paths", "200", "--z", "0.5") == 0
        laplace = json.loads((cli.saida / "bns_laplace.json").read_text(encoding="utf-8"))
        menos, mais = laplace["strip"]
        assert menos < 0.5 < mais
        assert laplace["values"][0]["phi_real"] > 0

    def test_bns_parametros_invalidos(self, cli):
        """Teste de integração: ρ > 0 é erro de validação"""
        assert cli("bns", "--rho", "0.2") == 2


class TestIntegracaoBanco:
    """
    Testes de integração entre CLI e banco de resultados
    """

    def test_detect_registrado_e_historico(self, cli, csv_curto, capsys):
        """
        Teste de integração: registro e consulta
        1. detect com --db grava execução e registros
        2. historico lista a execução
        3. historico --id mostra os registros
        """
        banco = f"sqlite:///{cli.tmp_path / 'resultados.db'}"

        assert cli("detect", str(csv_curto), "--db", banco) == 0
        assert "registrada no banco" in capsys.readouterr().out

        assert cli("historico", "--db", banco, "--comando-filtro", "detect") == 0
        saida = capsys.readouterr().out
        assert "#1" in saida and "detect" in saida

        assert cli("historico", "--db", banco, "--id", "1") == 0
        assert "35 registro(s) de janela" in capsys.readouterr().out

    def test_study_registrado(self, cli, capsys):
        """Teste de integração: resultados do estudo no banco"""
        banco = f"sqlite:///{cli.tmp_path / 'estudo.db'}"

        assert cli("study", "--seeds", "4", "--db", banco) == 0
        capsys.readouterr()

        assert cli("historico", "--db", banco, "--id", "1") == 0
        assert "6 resultado(s) de estudo" in capsys.readouterr().out

    def test_historico_id_inexistente(self, cli):
        """Teste de integração: ID inexistente sai com código 2"""
        banco = f"sqlite:///{cli.tmp_path / 'vazio.db'}"
        assert cli("historico", "--db", banco, "--id", "999") == 2
