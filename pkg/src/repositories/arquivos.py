"""
Entrada e saída em arquivos: ingestão de séries de preços e escrita de artefatos
CSV/JSON (UTF-8).
"""
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from src.models.dados import PriceSeries, WindowFrame
from src.models.dominio import BnsPaths
from src.utils.validators import IngestionError, ValidadorSerie

logger = logging.getLogger(__name__)


def ingest_csv(path, date_column: str = "date", close_column: str = "close") -> PriceSeries:
    """
    Lê um CSV com cabeçalho e devolve a série ordenada por data.
    Erros de leitura nomeiam a linha (contando o cabeçalho como linha 1) ou a coluna.
    """
    caminho = Path(path)
    if not caminho.is_file():
        raise IngestionError(f"Arquivo não encontrado: {caminho}")

    try:
        dados = pd.read_csv(caminho, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise IngestionError(f"Arquivo vazio: {caminho}")
    except pd.errors.ParserError as e:
        raise IngestionError(f"CSV malformado em {caminho}: {e}")

    for coluna in (date_column, close_column):
        if coluna not in dados.columns:
            raise IngestionError(f"Coluna '{coluna}' ausente em {caminho} (colunas: {list(dados.columns)})")

    if dados.empty:
        raise IngestionError(f"Arquivo sem linhas de dados: {caminho}")

    linhas = []
    vistas = {}
    for posicao, (data_bruta, fechamento_bruto) in enumerate(zip(dados[date_column], dados[close_column])):
        linha = posicao + 2
        data = ValidadorSerie.validar_data(data_bruta, linha)
        fechamento = ValidadorSerie.validar_fechamento(fechamento_bruto, linha)

        if data in vistas:
            raise IngestionError(f"Linha {linha}: data {data} repetida (já vista na linha {vistas[data]})")

        vistas[data] = linha
        linhas.append((data, fechamento))

    linhas.sort(key=lambda par: par[0])
    logger.info("Série lida de %s: %d pontos", caminho, len(linhas))

    return PriceSeries(dates=[d for d, _ in linhas], closes=np.array([c for _, c in linhas]))


def _preparar(path) -> Path:
    caminho = Path(path)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    return caminho


def write_json(dados, path) -> Path:
    caminho = _preparar(path)
    with open(caminho, "w", encoding="utf-8") as arquivo:
        json.dump(dados, arquivo, ensure_ascii=False, indent=2)
    return caminho


def write_series_csv(serie: PriceSeries, path) -> Path:
    caminho = _preparar(path)
    pd.DataFrame({"date": [d.isoformat() for d in serie.dates], "close": serie.closes}).to_csv(
        caminho, index=False, encoding="utf-8")
    return caminho


def write_path_csv(valores, path) -> Path:
    """Um caminho simulado: colunas period, value"""
    caminho = _preparar(path)
    pd.DataFrame({"period": np.arange(len(valores)), "value": valores}).to_csv(
        caminho, index=False, encoding="utf-8")
    return caminho


def export_paths_csv(paths: BnsPaths, path) -> Path:
    """Trajetórias BN-S em formato longo: path, t, X, sigma_sq"""
    caminho = _preparar(path)
    n_paths, n_pontos = paths.x.shape
    pd.DataFrame({
        "path": np.repeat(np.arange(n_paths), n_pontos),
        "t": np.tile(paths.times, n_paths),
        "X": paths.x.ravel(),
        "sigma_sq": paths.sigma_sq.ravel(),
    }).to_csv(caminho, index=False, encoding="utf-8")
    return caminho


def write_frame_csv(frame: WindowFrame, path) -> Path:
    """Colunas f0..f{n-1}, target, start_index"""
    caminho = _preparar(path)
    frame.to_dataframe().to_csv(caminho, index=False, encoding="utf-8")
    return caminho


def write_histogram_csv(pares, path) -> Path:
    caminho = _preparar(path)
    pd.DataFrame(list(pares), columns=["bin", "count"]).to_csv(caminho, index=False, encoding="utf-8")
    return caminho


def write_records_csv(registros, path) -> Path:
    """Lista de dicionários com as mesmas chaves"""
    caminho = _preparar(path)
    pd.DataFrame(list(registros)).to_csv(caminho, index=False, encoding="utf-8")
    return caminho
