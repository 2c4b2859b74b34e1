"""
Ponto de entrada do sistema de detecção de regime de saltos.

Subcomandos: simulate, study, detect, pipeline, stats, bns, historico.
Códigos de saída: 0 sucesso, 2 erro de validação, 1 qualquer outro erro.
"""
import argparse
import logging
import sys
from pathlib import Path

from src.models.dominio import BnsParams, InverseGaussianParams, PathGrid, SubordinatorSpec
from src.repositories import (
    DatabaseConfig,
    db_config,
    export_paths_csv,
    ingest_csv,
    write_histogram_csv,
    write_json,
    write_path_csv,
    write_records_csv,
    write_series_csv,
    write_frame_csv,
)
from src.services import EstudoSimulacaoService, PipelineService, ResultadoService, TesteSequencialService
from src.services import bns_service
from src.services.classificador_service import tabela_texto
from src.services.estudo_simulacao_service import CLASSES, generate_fixture
from src.services.pipeline_service import (
    ajustar_nu,
    histograma_continuo,
    histograma_inteiro,
    summary_stats,
)
from src.utils import ValidationError
from src.utils.config import RunConfig, carregar_config

logger = logging.getLogger("main")

FORMATO_LOG = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def criar_parser() -> argparse.ArgumentParser:
    comum = argparse.ArgumentParser(add_help=False)
    comum.add_argument("--config", help="Arquivo key=value com a configuração")
    comum.add_argument("--seed", type=int)
    comum.add_argument("--p-star", type=int, dest="p_star")
    comum.add_argument("--alpha0", type=float)
    comum.add_argument("--n-sims", type=int, dest="n_sims")
    comum.add_argument("--window-length", type=int, dest="window_length")
    comum.add_argument("--workers", type=int)
    comum.add_argument("--db", dest="database_url", help="URL do banco para registrar a execução")
    comum.add_argument("--output-dir", dest="output_dir")
    comum.add_argument("--log-level", dest="log_level")

    parser = argparse.ArgumentParser(description="Detecção de regime de saltos e estimação de θ")
    sub = parser.add_subparsers(dest="comando", required=True)

    simulate = sub.add_parser("simulate", parents=[comum], help="Gera caminhos de uma classe do estudo")
    simulate.add_argument("--class", dest="classe", choices=CLASSES, required=True)
    simulate.add_argument("--n-processes", type=int, dest="n_processes")

    study = sub.add_parser("study", parents=[comum], help="Estudo de simulação: detector vs ingênuo")
    study.add_argument("--seeds", type=int, nargs="+", help="Sementes mestras (padrão: --seed)")
    study.add_argument("--n-processes", type=int, dest="n_processes")

    detect = sub.add_parser("detect", parents=[comum], help="Detector por janela sobre um CSV")
    detect.add_argument("csv")

    pipeline = sub.add_parser("pipeline", parents=[comum], help="Quadros de atributos e classificadores")
    pipeline.add_argument("csv")
    pipeline.add_argument("--features", choices=("percent", "ref", "both"), default="both")
    pipeline.add_argument("--split", choices=("T1", "T2"))

    stats = sub.add_parser("stats", parents=[comum], help="Estatísticas descritivas da série")
    stats.add_argument("csv")

    bns = sub.add_parser("bns", parents=[comum], help="Modelo BN-S refinado")
    bns.add_argument("--mode", choices=("paths", "correlation", "laplace"), default="paths")
    bns.add_argument("--mu", type=float, default=0.0)
    bns.add_argument("--beta", type=float, default=0.0)
    bns.add_argument("--rho", type=float, default=-0.1)
    bns.add_argument("--lam", type=float, default=1.0)
    bns.add_argument("--theta", type=float, default=0.3)
    bns.add_argument("--sigma0-sq", type=float, default=0.04, dest="sigma0_sq")
    bns.add_argument("--rate", type=float, default=1.0, help="Taxa de saltos de Z")
    bns.add_argument("--ig-mean", type=float, default=0.05, dest="ig_mean")
    bns.add_argument("--ig-scale", type=float, default=0.1, dest="ig_scale")
    bns.add_argument("--rate-b", type=float, default=0.5, dest="rate_b", help="Taxa de saltos de Z^(b)")
    bns.add_argument("--ig-mean-b", type=float, default=0.2, dest="ig_mean_b")
    bns.add_argument("--ig-scale-b", type=float, default=0.4, dest="ig_scale_b")
    bns.add_argument("--horizon", type=float, default=1.0, help="T (fim do grid)")
    bns.add_argument("--steps", type=int, default=250)
    bns.add_argument("--n-paths", type=int, default=1000, dest="n_paths")
    bns.add_argument("--scheme", choices=bns_service.ESQUEMAS, default="euler")
    bns.add_argument("--s", type=float, default=0.25)
    bns.add_argument("--t", type=float, default=0.75)
    bns.add_argument("--z", type=float, nargs="+", default=[-0.5, 0.5])

    historico = sub.add_parser("historico", parents=[comum], help="Lista execuções registradas")
    historico.add_argument("--comando-filtro", dest="comando_filtro")
    historico.add_argument("--id", type=int, dest="execucao_id")

    return parser


def _saida(cfg: RunConfig) -> Path:
    return Path(cfg.output_dir)


def cmd_simulate(args, cfg: RunConfig) -> dict:
    if args.classe == "fixture":
        caminho = write_series_csv(generate_fixture(cfg.seed), _saida(cfg) / "fixture.csv")
        print(f"✓ Série fixture gravada em {caminho}")
        return {"arquivos": [str(caminho)]}

    servico = EstudoSimulacaoService(cfg.detector_config(), cfg.n_processes, cfg.jump_rate, cfg.workers)
    caminhos = servico.gerar(args.classe, cfg.seed)

    arquivos = [str(write_path_csv(valores, _saida(cfg) / args.classe / f"{args.classe}_{k:03d}.csv"))
                for k, valores in enumerate(caminhos)]
    print(f"✓ {len(arquivos)} caminho(s) da classe {args.classe} gravados em {_saida(cfg) / args.classe}")
    return {"arquivos": arquivos}


def cmd_study(args, cfg: RunConfig) -> dict:
    servico = EstudoSimulacaoService(cfg.detector_config(), cfg.n_processes, cfg.jump_rate, cfg.workers)
    relatorio = servico.run_study(args.seeds or [cfg.seed])

    write_json({"config": cfg.to_dict(), "rows": relatorio.to_dicts()}, _saida(cfg) / "study_report.json")
    write_records_csv(relatorio.to_dicts(), _saida(cfg) / "study_report.csv")

    for linha in relatorio.rows:
        print(f"✓ semente {linha.seed} | {linha.classe:8s} | {linha.method:8s} | {linha.correct}/{linha.total}")
    return {"relatorio": relatorio}


def cmd_detect(args, cfg: RunConfig) -> dict:
    serie = ingest_csv(args.csv, cfg.date_column, cfg.close_column)
    n = cfg.window_length
    if len(serie) < n + 1:
        raise ValidationError(f"A série tem {len(serie)} preços; são necessários pelo menos {n + 1}")

    nu = ajustar_nu(serie, (0, len(serie) - 2))
    registros = TesteSequencialService(cfg.detector_config(), cfg.workers).detectar_janelas(
        serie.closes, nu, n, cfg.seed)
    dicionarios = [r.to_dict() for r in registros]

    write_json({"config": cfg.to_dict(), "nu": {"mean": nu.mean, "scale": nu.scale}, "records": dicionarios},
               _saida(cfg) / "detect_records.json")
    write_records_csv(dicionarios, _saida(cfg) / "detect_records.csv")
    write_histogram_csv(histograma_inteiro([r.right_exits for r in registros], cfg.n_sims),
                        _saida(cfg) / "right_exit_histogram.csv")

    grandes = sum(r.label for r in registros)
    print(f"✓ {len(registros)} janelas analisadas; {grandes} classificadas como saltos grandes")
    return {"registros": registros}


def cmd_pipeline(args, cfg: RunConfig) -> dict:
    serie = ingest_csv(args.csv, cfg.date_column, cfg.close_column)
    tipos = ("percent", "ref") if args.features == "both" else (args.features,)

    servico = PipelineService(cfg.detector_config(), cfg.window_length, cfg.seed, cfg.workers)
    resultado = servico.executar(serie, cfg.split_spec(), cfg.classifier_specs(), tipos,
                                 cfg.rebalance_ratio, cfg.theta_mode)

    tabelas = []
    for tipo, quadro in resultado.quadros.items():
        write_frame_csv(quadro, _saida(cfg) / f"frame_{tipo}.csv")
        tabela = tabela_texto(resultado.relatorios[tipo])
        tabelas.append(f"[{quadro.feature_kind}]\n{tabela}")

        for kind, (indices, theta) in resultado.thetas[tipo].items():
            write_records_csv([{"start_index": int(i), "theta": float(v)} for i, v in zip(indices, theta)],
                              _saida(cfg) / f"theta_{tipo}_{kind}.csv")

    write_json({
        "config": cfg.to_dict(),
        "reports": {tipo: {kind: rel.to_dict() for kind, rel in rels.items()}
                    for tipo, rels in resultado.relatorios.items()},
    }, _saida(cfg) / "pipeline_reports.json")

    texto = "\n\n".join(tabelas)
    (_saida(cfg) / "pipeline_reports.txt").write_text(texto + "\n", encoding="utf-8")
    print(texto)
    print(f"✓ Relatórios gravados em {_saida(cfg)}")
    return {"resultado": resultado}


def cmd_stats(args, cfg: RunConfig) -> dict:
    serie = ingest_csv(args.csv, cfg.date_column, cfg.close_column)
    resumo = summary_stats(serie)

    write_json({"config": cfg.to_dict(), "summary": resumo}, _saida(cfg) / "summary_stats.json")
    write_histogram_csv(histograma_continuo(serie.changes()), _saida(cfg) / "daily_change_histogram.csv")
    write_histogram_csv(histograma_continuo(serie.percent_changes()),
                        _saida(cfg) / "daily_percent_change_histogram.csv")

    for nome, valores in resumo.items():
        print(f"✓ {nome}: " + ", ".join(f"{k}={v:.2f}" for k, v in valores.items()))
    return {"resumo": resumo}


def _modelo_bns(args):
    p = BnsParams(mu=args.mu, beta=args.beta, rho=args.rho, lam=args.lam, theta=args.theta,
                  sigma0_sq=args.sigma0_sq)
    z = SubordinatorSpec(InverseGaussianParams(args.ig_mean, args.ig_scale), args.rate)
    zb = SubordinatorSpec(InverseGaussianParams(args.ig_mean_b, args.ig_scale_b), args.rate_b)
    return p, z, zb


def cmd_bns(args, cfg: RunConfig) -> dict:
    p, z, zb = _modelo_bns(args)
    grid = PathGrid(0.0, args.horizon, args.steps)

    if args.mode == "laplace":
        limite = bns_service.theta_hat(z, zb, p.theta)
        faixa = bns_service.strip_bounds(p, 0.0, args.horizon, limite)
        valores = []
        for zc in args.z:
            phi = bns_service.laplace_transform(zc, p, z, zb, 0.0, args.horizon, 0.0, p.sigma0_sq)
            media, erro = bns_service.laplace_monte_carlo(zc, p, z, zb, 0.0, args.horizon, 0.0, p.sigma0_sq,
                                                          args.n_paths, cfg.seed, workers=cfg.workers)
            valores.append({"z": zc, "phi_real": phi.real, "phi_imag": phi.imag,
                            "monte_carlo": media, "monte_carlo_se": erro})
            print(f"✓ φ({zc}) = {phi.real:.6f} (Monte Carlo {media:.6f} ± {erro:.6f})")

        write_json({"config": cfg.to_dict(), "strip": list(faixa), "theta_hat": limite, "values": valores},
                   _saida(cfg) / "bns_laplace.json")
        return {"valores": valores}

    caminhos = bns_service.simulate_paths(p, z, zb, grid, args.n_paths, cfg.seed, args.scheme, cfg.workers)

    if args.mode == "paths":
        arquivo = export_paths_csv(caminhos, _saida(cfg) / "bns_paths.csv")
        print(f"✓ {caminhos.n_paths} trajetórias ({args.scheme}) gravadas em {arquivo}")
        return {"caminhos": caminhos}

    formula = bns_service.correlation_from_paths(p, z, zb, caminhos, args.s, args.t)
    amostral = bns_service.correlation_monte_carlo(caminhos, args.s, args.t)
    write_json({"config": cfg.to_dict(), "s": args.s, "t": args.t, "formula_path_0": formula,
                "monte_carlo": amostral}, _saida(cfg) / "bns_correlation.json")
    print(f"✓ Corr(X_s, X_t): fórmula {formula:.6f}, amostral {amostral:.6f}")
    return {"formula": formula, "monte_carlo": amostral}


def _banco(cfg: RunConfig) -> DatabaseConfig:
    banco = DatabaseConfig(cfg.database_url) if cfg.database_url else db_config
    banco.create_tables()
    return banco


def cmd_historico(args, cfg: RunConfig) -> dict:
    servico = ResultadoService()
    servico.db_config = _banco(cfg)

    if args.execucao_id is not None:
        execucao = servico.obter_execucao_por_id(args.execucao_id)
        if not execucao:
            raise ValidationError(f"Execução com ID {args.execucao_id} não encontrada")

        registros = servico.obter_registros_execucao(execucao.id)
        resultados = servico.obter_resultados_estudo(execucao.id)
        print(f"✓ Execução {execucao.id} ({execucao.comando}, semente {execucao.semente})")
        print(f"✓ {len(registros)} registro(s) de janela, {len(resultados)} resultado(s) de estudo")
        for r in resultados:
            print(f"  {r.classe:8s} | {r.metodo:8s} | {r.corretos}/{r.total}")
        return {"execucao": execucao}

    execucoes = servico.listar_execucoes(args.comando_filtro)
    for e in execucoes:
        print(f"✓ #{e.id} {e.data_execucao:%Y-%m-%d %H:%M} {e.comando} (semente {e.semente})")
    if not execucoes:
        print("Nenhuma execução registrada")
    return {"execucoes": execucoes}


COMANDOS = {
    "simulate": cmd_simulate,
    "study": cmd_study,
    "detect": cmd_detect,
    "pipeline": cmd_pipeline,
    "stats": cmd_stats,
    "bns": cmd_bns,
    "historico": cmd_historico,
}


def _registrar(comando: str, cfg: RunConfig, resultado: dict):
    """Persiste a execução quando há banco configurado"""
    servico = ResultadoService()
    servico.db_config = _banco(cfg)
    execucao = servico.registrar_execucao(comando, cfg.seed, cfg.to_dict())

    if "registros" in resultado:
        servico.registrar_janelas(execucao.id, resultado["registros"])
    if "relatorio" in resultado:
        servico.registrar_resultados_estudo(execucao.id, resultado["relatorio"])

    print(f"✓ Execução registrada no banco (#{execucao.id})")


def main(argv=None) -> int:
    args = criar_parser().parse_args(argv)

    try:
        sobrescritas = {nome: getattr(args, nome, None) for nome in
                        ("seed", "p_star", "alpha0", "n_sims", "window_length", "workers", "database_url",
                         "output_dir", "log_level", "n_processes", "split")}
        cfg = carregar_config(args.config, **sobrescritas)

        logging.basicConfig(level=cfg.log_level, format=FORMATO_LOG, force=True)
        write_json(cfg.to_dict(), _saida(cfg) / "effective_config.json")

        resultado = COMANDOS[args.comando](args, cfg)

        if cfg.database_url and args.comando != "historico":
            _registrar(args.comando, cfg, resultado)

        return 0

    except ValidationError as e:
        print(f"✗ Erro de validação: {e}")
        return 2
    except Exception as e:
        logger.debug("Falha em %s", args.comando, exc_info=True)
        print(f"✗ Erro: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
