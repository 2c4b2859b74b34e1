"""
Teste sequencial de regime de saltos.

Sob H₁ a medida de Lévy é ν*(dx) = (1 + a x)ν(dx). O log da razão de verossimilhança
u_t tem deriva γ, difusão |β| e saltos negativos −log(1+X) com intensidade M = a
(dinâmica "triplet"). Por padrão o detector simula a parte integral do gerador ℒ que
define os envelopes, com difusão |β|: saltos positivos y ~ K compensados pela deriva −C
(dinâmica "generator"). Nela as saídas pela direita crescem com a e são contadas contra p*.
"""
import logging
import math
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from src.models.dados import percent_changes
from src.models.dominio import (
    DINAMICAS_U,
    BoundarySolution,
    DecisionRule,
    DetectionRecord,
    DetectorConfig,
    ExitResult,
    GeneratorCoefficients,
    InverseGaussianParams,
    JumpHypothesis,
    QuadratureSpec,
)
from src.services.levy_service import amostrar_ig, ig_moments, ig_pdf
from src.utils.paralelo import mapear
from src.utils.quadratura import avaliar_vetorizado, integrate_interval, integrate_tail
from src.utils.sementes import criar_gerador, derivar_semente
from src.utils.validators import (
    BoundarySolveError,
    DomainError,
    ValidadorAmostras,
    ValidadorNumerico,
    ValidationError,
)

logger = logging.getLogger(__name__)

TAMANHO_LOTE = 4096
B_LINEAR = 1e-12


class IntegraisUnitarias(NamedTuple):
    """Integrais contra ν que, multiplicadas por a, dão os coeficientes"""
    beta: float      # ∫(1∧x)x ν
    m: float         # ∫_{x>1} x ν
    gamma: float     # ∫₀¹ (termo log − x) ν
    C: float         # ∫ log(1+x)/(1+log(1+x)) ν
    M: float         # ∫ ν
    salto: float     # ∫ log(1+x) ν


def _integrar_nu(h, nu: InverseGaussianParams, quad: QuadratureSpec) -> float:
    """∫₀^∞ h(x) ν(dx), com o domínio partido em x = 1"""

    def integrando(x):
        return avaliar_vetorizado(h, x) * ig_pdf(x, nu)

    return integrate_interval(integrando, 0.0, 1.0, quad) + integrate_tail(integrando, 1.0, quad)


@lru_cache(maxsize=256)
def integrais_unitarias(nu: InverseGaussianParams, gamma_log_term: str = "squared_log",
                        quad: QuadratureSpec = QuadratureSpec()) -> IntegraisUnitarias:
    if gamma_log_term == "squared_log":
        termo_log = lambda x: np.log1p(x) ** 2
    elif gamma_log_term == "log_of_square":
        termo_log = lambda x: 2.0 * np.log1p(x)
    else:
        raise ValidationError(f"gamma_log_term desconhecido: {gamma_log_term}")

    def densidade(x):
        return ig_pdf(x, nu)

    cauda = lambda h: integrate_tail(lambda x: h(x) * densidade(x), 1.0, quad)
    cabeca = lambda h: integrate_interval(lambda x: h(x) * densidade(x), 0.0, 1.0, quad)

    m = cauda(lambda x: x)

    return IntegraisUnitarias(
        beta=cabeca(lambda x: x ** 2) + m,
        m=m,
        gamma=cabeca(lambda x: termo_log(x) - x),
        C=_integrar_nu(lambda x: np.log1p(x) / (1.0 + np.log1p(x)), nu, quad),
        M=_integrar_nu(lambda x: np.ones_like(x), nu, quad),
        salto=_integrar_nu(np.log1p, nu, quad),
    )


def k_integral(h, a: float, nu: InverseGaussianParams, quad: QuadratureSpec = None) -> float:
    """∫h(y)K(dy) = a∫h(log(1+x))ν(dx)"""
    a = ValidadorNumerico.validar_nao_negativo("Inclinação a", a)
    if a == 0:
        return 0.0

    quad = quad or QuadratureSpec()
    return a * _integrar_nu(lambda x: avaliar_vetorizado(h, np.log1p(x)), nu, quad)


def generator_coeffs(hyp: JumpHypothesis, gamma_log_term: str = "squared_log",
                     quad: QuadratureSpec = None) -> GeneratorCoefficients:
    """
    β = −(a/σ)∫(1∧x)x ν,  m = a∫_{x>1} x ν,  γ = m − β²/2 + a∫₀¹(log(1+x)² − x)ν,
    C = ∫y/(1+y) K(dy),  M = ∫K(dy),  B = 2(C + γ)/β²
    """
    if hyp.a == 0:
        raise DomainError("Hipótese degenerada: a = 0 não define teste")

    unit = integrais_unitarias(hyp.nu, gamma_log_term, quad or QuadratureSpec())
    a = hyp.a

    beta = -(a / hyp.sigma) * unit.beta
    m = a * unit.m
    gamma = m - beta ** 2 / 2.0 + a * unit.gamma
    C = a * unit.C
    M = a * unit.M

    if beta == 0:
        raise DomainError("beta nulo: coeficiente B indefinido")

    return GeneratorCoefficients(beta=beta, m=m, gamma=gamma, C=C, M=M, B=2.0 * (C + gamma) / beta ** 2)


def _validar_ponto(x, rule: DecisionRule):
    x_arr = np.asarray(x, dtype=float)
    folga = 1e-12 * max(1.0, rule.r - rule.l)

    if np.any(~np.isfinite(x_arr)) or np.any(x_arr < rule.l - folga) or np.any(x_arr > rule.r + folga):
        raise DomainError(f"x deve estar em [{rule.l}, {rule.r}]")

    return np.clip(x_arr, rule.l, rule.r)


def sub_solution_g(x, rule: DecisionRule, c: GeneratorCoefficients):
    """
    g(x) = e^{B(x−l)} sinh(k(r−x))/sinh(k(r−l)),  k = √(2M+B²)/|β|,
    na forma e^{(B−k)(x−l)}·expm1(−2k(r−x))/expm1(−2k(r−l)).
    """
    if c.beta == 0:
        raise DomainError("sub_solution_g exige beta diferente de zero")

    xs = _validar_ponto(x, rule)
    k = math.sqrt(2.0 * c.M + c.B ** 2) / abs(c.beta)
    l, r = rule.l, rule.r

    valor = np.exp((c.B - k) * (xs - l)) * np.expm1(-2.0 * k * (r - xs)) / np.expm1(-2.0 * k * (r - l))
    return float(valor) if np.ndim(x) == 0 else valor


def super_solution_f(x, rule: DecisionRule, c: GeneratorCoefficients):
    """f(x) = (e^{2Br} − e^{2Bx})/(e^{2Br} − e^{2Bl}); linear em B → 0"""
    xs = _validar_ponto(x, rule)
    l, r, B = rule.l, rule.r, c.B

    if abs(B) < B_LINEAR:
        valor = (r - xs) / (r - l)
    elif B > 0:
        valor = np.expm1(2.0 * B * (xs - r)) / np.expm1(2.0 * B * (l - r))
    else:
        total = np.expm1(2.0 * B * (r - l))
        valor = (total - np.expm1(2.0 * B * (xs - l))) / total

    return float(valor) if np.ndim(x) == 0 else valor


def raiz_envelope_f(alpha0: float, l: float, c: GeneratorCoefficients) -> Optional[float]:
    """Inversão fechada de f(0) = 1 − α₀; None se não houver r positivo"""
    if abs(c.B) < B_LINEAR:
        return -l * (1.0 - alpha0) / alpha0

    argumento = -(1.0 - alpha0) * math.expm1(2.0 * c.B * l) / alpha0
    if not argumento > -1.0:
        return None

    r = math.log1p(argumento) / (2.0 * c.B)
    return r if math.isfinite(r) and r > 0 else None


def raiz_envelope_g(alpha0: float, l: float, c: GeneratorCoefficients, r_max: float) -> Optional[float]:
    """Bisseção de g(0; r) = 1 − α₀ em (0, r_max]; g(0; r) é crescente em r"""
    alvo = 1.0 - alpha0

    def excesso(r):
        return sub_solution_g(0.0, DecisionRule(l, r, alpha0), c) - alvo

    inferior = 1e-12
    if excesso(r_max) < 0 or excesso(inferior) > 0:
        return None

    return float(optimize.bisect(excesso, inferior, r_max, xtol=1e-14, maxiter=500))


def solve_right_boundary(alpha0: float, l: float, c: GeneratorCoefficients,
                         r_max: float = 50.0, strict: bool = True) -> BoundarySolution:
    """
    r = (r_f + r_g)/2 com f(0) = g(0) = 1 − α₀.

    strict=True levanta BoundarySolveError se algum envelope não tiver raiz.
    Caso contrário usa a raiz disponível e, sem nenhuma, r_max.
    """
    ValidadorNumerico.validar_intervalo("alpha0", alpha0, 0.0, 1.0, aberto=True)
    if ValidadorNumerico.validar_real("l", l) >= 0:
        raise DomainError("A fronteira esquerda deve ser negativa")

    r_f = raiz_envelope_f(alpha0, l, c)
    r_g = raiz_envelope_g(alpha0, l, c, r_max) if c.beta != 0 else None
    raizes = [r for r in (r_f, r_g) if r is not None]

    if strict and len(raizes) < 2:
        raise BoundarySolveError(
            f"Sem fronteira direita positiva (r_f={r_f}, r_g={r_g})", coeficientes=c.to_dict()
        )

    if not raizes:
        logger.warning("Nenhum envelope tem raiz; usando r_max=%s (coeficientes %s)", r_max, c.to_dict())
        return BoundarySolution(r_f=None, r_g=None, r=float(r_max))

    if len(raizes) == 1:
        logger.warning("Apenas um envelope tem raiz (r_f=%s, r_g=%s)", r_f, r_g)

    return BoundarySolution(r_f=r_f, r_g=r_g, r=float(np.mean(raizes)))


def _simular_lote(tarefa):
    (deriva, beta, M, sinal, mean, scale, l, r, n, passos, dt, seed, lote) = tarefa
    rng = criar_gerador(seed, lote)

    u = np.zeros(n)
    vivo = np.ones(n, dtype=bool)
    direita = esquerda = 0
    difusao = abs(beta) * math.sqrt(dt)

    for _ in range(passos):
        idx = np.flatnonzero(vivo)
        if idx.size == 0:
            break

        incremento = deriva * dt + difusao * rng.standard_normal(idx.size)

        if M > 0:
            contagens = rng.poisson(M * dt, idx.size)
            total = int(contagens.sum())
            if total:
                marcas = sinal * np.log1p(amostrar_ig(rng, mean, scale, total))
                dono = np.repeat(np.arange(idx.size), contagens)
                incremento += np.bincount(dono, weights=marcas, minlength=idx.size)

        u[idx] += incremento
        fora_dir = u[idx] > r
        fora_esq = u[idx] < l
        direita += int(fora_dir.sum())
        esquerda += int(fora_esq.sum())
        vivo[idx[fora_dir | fora_esq]] = False

    return direita, esquerda, int(vivo.sum())


def dinamica_u(c: GeneratorCoefficients, dynamics: str = "triplet"):
    """(deriva, sinal dos saltos) de u_t: triplet → (γ, −1); generator → (−C, +1)"""
    if dynamics == "triplet":
        return c.gamma, -1.0
    if dynamics == "generator":
        return -c.C, 1.0
    raise ValidationError(f"dynamics deve ser um de {DINAMICAS_U}")


def simulate_loglikelihood(c: GeneratorCoefficients, hyp: JumpHypothesis, rule: DecisionRule,
                           n_sims: int, t_max: float = 10.0, dt: float = 1e-3, seed: int = 0,
                           workers: int = 1, dynamics: str = "triplet") -> ExitResult:
    """
    Simula u_t a partir de 0 até a primeira saída de [l, r] ou até t_max.
    A deriva e o sentido dos saltos seguem `dinamica_u`.
    Lotes de TAMANHO_LOTE trajetórias usam fluxos derivados de (seed, lote).
    """
    n_sims = ValidadorNumerico.validar_inteiro_positivo("n_sims", n_sims)
    ValidadorNumerico.validar_positivo("t_max", t_max)
    ValidadorNumerico.validar_positivo("dt", dt)
    passos = max(1, int(math.ceil(t_max / dt - 1e-9)))
    deriva, sinal = dinamica_u(c, dynamics)

    tarefas = []
    for lote, inicio in enumerate(range(0, n_sims, TAMANHO_LOTE)):
        n = min(TAMANHO_LOTE, n_sims - inicio)
        tarefas.append((deriva, c.beta, c.M, sinal, hyp.nu.mean, hyp.nu.scale, rule.l, rule.r,
                        n, passos, dt, seed, lote))

    resultados = mapear(_simular_lote, tarefas, workers)
    direita = sum(res[0] for res in resultados)
    esquerda = sum(res[1] for res in resultados)
    sem_saida = sum(res[2] for res in resultados)

    return ExitResult(exits_right=direita, exits_left=esquerda, no_exit=sem_saida, n_sims=n_sims)


def jump_drift(hyp: JumpHypothesis, quad: QuadratureSpec = None) -> float:
    """Média por unidade de tempo da componente de saltos: −∫y K(dy)"""
    return -k_integral(lambda y: y, hyp.a, hyp.nu, quad)


def sample_jump_component(hyp: JumpHypothesis, t: float, n: int, seed: int) -> np.ndarray:
    """n realizações da soma dos saltos de u até o tempo t"""
    ValidadorNumerico.validar_nao_negativo("t", t)
    n = ValidadorNumerico.validar_inteiro_positivo("n", n)
    rng = criar_gerador(seed)

    contagens = rng.poisson(hyp.a * t, n)
    marcas = -np.log1p(amostrar_ig(rng, hyp.nu.mean, hyp.nu.scale, int(contagens.sum())))
    return np.bincount(np.repeat(np.arange(n), contagens), weights=marcas, minlength=n)


def fit_tilt_a(period_jumps, nu: InverseGaussianParams, a_max: float = 50.0) -> float:
    """
    Casamento de momentos: (m₁ + a m₂)/(1 + a m₁) = média amostral,
    limitado em 0 por baixo e em a_max por cima.
    """
    saltos = ValidadorAmostras.validar_positivas(period_jumps, minimo=1, nome="saltos")
    media = float(np.mean(saltos))
    m1, m2 = ig_moments(nu)

    if media <= m1:
        return 0.0

    denominador = m2 - media * m1
    if denominador <= 0:
        logger.warning("Média dos saltos %.4g no polo do estimador (m₂/m₁ = %.4g); a limitado em %s",
                       media, m2 / m1, a_max)
        return float(a_max)

    a = (media - m1) / denominador
    if a > a_max:
        logger.warning("Inclinação estimada %.4g acima do limite; usando a_max=%s", a, a_max)
        return float(a_max)

    return float(a)


def saltos_negativos(precos) -> np.ndarray:
    """Magnitudes das variações percentuais diárias negativas"""
    variacoes = percent_changes(precos)
    return -variacoes[variacoes < 0]


def detect(period, training_nu: InverseGaussianParams, alpha0: float = None, p_star: int = None,
           n_sims: int = None, seed: int = 0, config: DetectorConfig = None,
           inicio: int = 0) -> DetectionRecord:
    """
    Detector de regime para uma janela de preços.

    Passos: saltos negativos → â → σ das variações → coeficientes → [l, r] →
    simulação de u_t → rótulo 1 se as saídas pela direita forem pelo menos p*.
    """
    config = config or DetectorConfig()
    mudancas = {nome: valor for nome, valor in
                (("alpha0", alpha0), ("p_star", p_star), ("n_sims", n_sims)) if valor is not None}
    if mudancas:
        config = config.com(**mudancas)

    precos = ValidadorAmostras.validar_precos(period, minimo=2)
    variacoes = percent_changes(precos)
    saltos = -variacoes[variacoes < 0]
    sigma = float(np.std(variacoes))

    a_hat = fit_tilt_a(saltos, training_nu, config.a_max) if saltos.size else 0.0

    if a_hat == 0 or sigma == 0:
        logger.warning("Janela %d degenerada (a=%.4g, sigma=%.4g); rótulo 0", inicio, a_hat, sigma)
        return DetectionRecord(
            period_start_index=inicio, a_hat=a_hat, sigma=sigma,
            beta=None, gamma=None, C=None, M=None, B=None, r_f=None, r_g=None, r=None,
            right_exits=0, left_exits=0, no_exits=config.n_sims, label=0,
        )

    hyp = JumpHypothesis(a=a_hat, nu=training_nu, sigma=sigma)
    c = generator_coeffs(hyp, config.gamma_log_term, config.quadrature)
    fronteira = solve_right_boundary(config.alpha0, config.left, c, config.r_max, strict=False)
    rule = DecisionRule(config.left, fronteira.r, config.alpha0)

    saidas = simulate_loglikelihood(c, hyp, rule, config.n_sims, config.t_max, config.dt, seed,
                                    config.workers, config.dynamics)

    return DetectionRecord(
        period_start_index=inicio, a_hat=a_hat, sigma=sigma,
        beta=c.beta, gamma=c.gamma, C=c.C, M=c.M, B=c.B,
        r_f=fronteira.r_f, r_g=fronteira.r_g, r=fronteira.r,
        right_exits=saidas.exits_right, left_exits=saidas.exits_left, no_exits=saidas.no_exit,
        label=int(saidas.exits_right >= config.p_star),
    )


def naive_classify(period_jumps, training_jumps) -> int:
    """1 se a média dos saltos do período superar a média do treino"""
    periodo = np.asarray(period_jumps, dtype=float)
    treino = np.asarray(training_jumps, dtype=float)

    if periodo.size == 0 or treino.size == 0:
        raise ValidationError("Saltos do período e do treino não podem ser vazios")

    return int(periodo.mean() > treino.mean())


def _detectar_janela(tarefa):
    precos, nu, config, semente, inicio = tarefa
    return detect(precos, nu, seed=semente, config=config, inicio=inicio)


class TesteSequencialService:
    def __init__(self, config: DetectorConfig = None, workers: int = 1):
        self.config = config or DetectorConfig()
        self.workers = workers

    def detectar(self, precos, nu: InverseGaussianParams, semente: int, inicio: int = 0) -> DetectionRecord:
        return detect(precos, nu, seed=semente, config=self.config, inicio=inicio)

    def detectar_janelas(self, precos, nu: InverseGaussianParams, n: int, semente: int) -> list:
        """
        Um registro por janela de n variações: a janela j usa precos[j : j+n+1]
        e a semente derivada de (semente, j).
        """
        n = ValidadorNumerico.validar_inteiro_positivo("n", n, minimo=2)
        precos = ValidadorAmostras.validar_precos(precos, minimo=2)

        if precos.size < n + 1:
            raise ValidationError(f"A série precisa de pelo menos n+1 = {n + 1} preços")

        tarefas = [(precos[j:j + n + 1], nu, self.config, derivar_semente(semente, j), j)
                   for j in range(precos.size - n)]
        logger.info("Detectando %d janelas de %d dias", len(tarefas), n)

        return mapear(_detectar_janela, tarefas, self.workers)
