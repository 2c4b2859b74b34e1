"""
Configuração de execução.

Precedência: flags do CLI > variáveis de ambiente > arquivo key=value (--config)
ou .env do diretório atual > padrões.
"""
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Tuple

from decouple import AutoConfig, Config, RepositoryEnv

from src.models.dados import TIPOS_CLASSIFICADOR, ClassifierSpec, SplitSpec
from src.models.dominio import DINAMICAS_U, TERMOS_LOG_GAMMA, DetectorConfig
from src.utils.sementes import SEMENTE_MAXIMA, derivar_semente
from src.utils.validators import ConfigError, ValidationError

NIVEIS_LOG = ("DEBUG", "INFO", "WARNING", "ERROR")

# prefixo da chave → tipo de classificador, hiperparâmetro → conversor
HIPERPARAMETROS = {
    "LR": ("logistic", {"learning_rate": float, "epochs": int, "l2": float}),
    "DT": ("decision-tree", {"max_depth": int, "min_samples_split": int}),
    "RF": ("random-forest", {"n_trees": int, "max_depth": int, "min_samples_split": int,
                             "max_features": lambda v: v if v == "sqrt" else int(v),
                             "bootstrap": lambda v: str(v).strip().lower() in ("1", "true", "yes", "on")}),
    "NN": ("feedforward-net", {"hidden": int, "epochs": int, "learning_rate": float, "batch_size": int}),
}


def ler_faixa(valor) -> Optional[Tuple[int, int]]:
    """'100-1000' ou '100,1000' → (100, 1000)"""
    if valor is None or valor == "":
        return None
    if isinstance(valor, (tuple, list)):
        inicio, fim = valor
        return int(inicio), int(fim)

    partes = str(valor).replace(",", "-").split("-")
    if len(partes) != 2:
        raise ValueError(f"faixa '{valor}' deve ter o formato inicio-fim")
    return int(partes[0]), int(partes[1])


def ler_lista(valor) -> Tuple[str, ...]:
    if isinstance(valor, (tuple, list)):
        return tuple(valor)
    return tuple(item.strip() for item in str(valor).split(",") if item.strip())


@dataclass
class RunConfig:
    window_length: int = 30
    p_star: int = 8
    alpha0: float = 0.1
    t_max: float = 10.0
    dt: float = 1e-3
    n_sims: int = 10
    seed: int = 0
    a_max: float = 50.0
    r_max: float = 50.0
    left_boundary: float = -1.0
    gamma_log_term: str = "squared_log"
    dynamics: str = "generator"
    jump_rate: float = 1.0
    n_processes: int = 100
    workers: int = 1
    date_column: str = "date"
    close_column: str = "close"
    output_dir: str = "saida"
    split: str = "T1"
    train_range: Optional[Tuple[int, int]] = None
    test_range: Optional[Tuple[int, int]] = None
    classifiers: Tuple[str, ...] = TIPOS_CLASSIFICADOR
    rebalance_ratio: float = 1.0
    theta_mode: str = "hard"
    database_url: Optional[str] = None
    log_level: str = "INFO"
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        ValidadorConfig.validar(self)

    def detector_config(self) -> DetectorConfig:
        return DetectorConfig(
            alpha0=self.alpha0, p_star=self.p_star, n_sims=self.n_sims, t_max=self.t_max, dt=self.dt,
            a_max=self.a_max, r_max=self.r_max, left=self.left_boundary,
            gamma_log_term=self.gamma_log_term, dynamics=self.dynamics,
        )

    def split_spec(self) -> SplitSpec:
        """Faixas explícitas têm precedência sobre a divisão predefinida"""
        if self.train_range and self.test_range:
            return SplitSpec(tuple(self.train_range), tuple(self.test_range))
        return SplitSpec.predefinido(self.split)

    def classifier_specs(self) -> list:
        specs = []
        for k, kind in enumerate(self.classifiers):
            hiperparametros = dict(self.hyperparameters.get(kind, {}))
            if kind == "random-forest":
                hiperparametros.setdefault("workers", self.workers)
            specs.append(ClassifierSpec(kind, hiperparametros, derivar_semente(self.seed, k)))
        return specs

    def to_dict(self) -> dict:
        dados = asdict(self)
        for chave in ("train_range", "test_range", "classifiers"):
            if dados[chave] is not None:
                dados[chave] = list(dados[chave])
        return dados

    def com(self, **mudancas) -> "RunConfig":
        """Cópia com as mudanças não nulas aplicadas (usado pelas flags do CLI)"""
        validas = {k: v for k, v in mudancas.items() if v is not None}
        return replace(self, **validas)


class ValidadorConfig:
    @staticmethod
    def validar(cfg: RunConfig):
        """Invariantes do RunConfig; qualquer violação vira ConfigError"""
        if cfg.window_length < 2:
            raise ConfigError("WINDOW_LENGTH deve ser pelo menos 2")

        if not 0 < cfg.alpha0 < 1:
            raise ConfigError("ALPHA0 deve estar em (0, 1)")

        if cfg.n_sims < 1:
            raise ConfigError("N_SIMS deve ser pelo menos 1")

        if not 1 <= cfg.p_star <= cfg.n_sims:
            raise ConfigError(f"P_STAR deve estar entre 1 e N_SIMS ({cfg.n_sims})")

        if not 0 <= cfg.seed <= SEMENTE_MAXIMA:
            raise ConfigError("SEED deve ser um inteiro sem sinal de 64 bits")

        if cfg.gamma_log_term not in TERMOS_LOG_GAMMA:
            raise ConfigError(f"GAMMA_LOG_TERM deve ser um de {TERMOS_LOG_GAMMA}")

        if cfg.dynamics not in DINAMICAS_U:
            raise ConfigError(f"DYNAMICS deve ser um de {DINAMICAS_U}")

        if cfg.theta_mode not in ("hard", "soft"):
            raise ConfigError("THETA_MODE deve ser 'hard' ou 'soft'")

        if cfg.log_level.upper() not in NIVEIS_LOG:
            raise ConfigError(f"LOG_LEVEL deve ser um de {NIVEIS_LOG}")

        if cfg.rebalance_ratio < 1:
            raise ConfigError("REBALANCE_RATIO deve ser pelo menos 1")

        if cfg.workers < 1 or cfg.n_processes < 1:
            raise ConfigError("WORKERS e N_PROCESSES devem ser pelo menos 1")

        desconhecidos = set(cfg.classifiers) - set(TIPOS_CLASSIFICADOR)
        if desconhecidos or not cfg.classifiers:
            raise ConfigError(f"CLASSIFIERS inválido: {sorted(desconhecidos) or 'vazio'}")

        if bool(cfg.train_range) != bool(cfg.test_range):
            raise ConfigError("TRAIN_RANGE e TEST_RANGE devem ser informados juntos")

        # as demais regras vêm dos próprios tipos de domínio
        try:
            cfg.detector_config()
            cfg.split_spec()
            cfg.classifier_specs()
        except ConfigError:
            raise
        except ValidationError as e:
            raise ConfigError(str(e))


def _fonte(caminho=None):
    if caminho is None:
        return AutoConfig(search_path=str(Path.cwd()))

    if not Path(caminho).is_file():
        raise ConfigError(f"Arquivo de configuração não encontrado: {caminho}")
    return Config(RepositoryEnv(str(caminho)))


def carregar_config(caminho=None, **sobrescritas) -> RunConfig:
    """
    Monta o RunConfig a partir de ambiente/arquivo e aplica as sobrescritas não nulas.
    """
    fonte = _fonte(caminho)
    valores = {}

    for campo in fields(RunConfig):
        if campo.name == "hyperparameters":
            continue

        bruto = fonte(campo.name.upper(), default=None)
        if bruto is None:
            continue

        try:
            if campo.name in ("train_range", "test_range"):
                valores[campo.name] = ler_faixa(bruto)
            elif campo.name == "classifiers":
                valores[campo.name] = ler_lista(bruto)
            elif campo.name == "database_url":
                valores[campo.name] = bruto or None
            else:
                conversor = type(campo.default) if campo.default is not None else str
                valores[campo.name] = conversor(bruto)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Valor inválido para {campo.name.upper()}: '{bruto}' ({e})")

    hiperparametros = {}
    for prefixo, (tipo, conversores) in HIPERPARAMETROS.items():
        for nome, conversor in conversores.items():
            chave = f"{prefixo}_{nome.upper()}"
            bruto = fonte(chave, default=None)
            if bruto is None:
                continue
            try:
                hiperparametros.setdefault(tipo, {})[nome] = conversor(bruto)
            except (TypeError, ValueError):
                raise ConfigError(f"Valor inválido para {chave}: '{bruto}'")

    valores["hyperparameters"] = hiperparametros
    valores.update({k: v for k, v in sobrescritas.items() if v is not None})

    if "log_level" in valores:
        valores["log_level"] = str(valores["log_level"]).upper()

    return RunConfig(**valores)
