import pytest
import logging
import math

import numpy as np

from src.models.dominio import (
    DecisionRule,
    DetectorConfig,
    GeneratorCoefficients,
    InverseGaussianParams,
    JumpHypothesis
)
from src.services.levy_service import ig_sample, sample_tilted
from src.services.teste_sequencial_service import (
    TesteSequencialService,
    detect,
    dinamica_u,
    fit_tilt_a,
    generator_coeffs,
    integrais_unitarias,
    jump_drift,
    k_integral,
    naive_classify,
    raiz_envelope_f,
    sample_jump_component,
    saltos_negativos,
    simulate_loglikelihood,
    solve_right_boundary,
    sub_solution_g,
    super_solution_f
)
from src.utils.sementes import derivar_semente
from src.utils.validators import BoundarySolveError, DomainError, FitError, ValidationError


def _coeficientes(B, M=1.0, beta=-1.0):
    return GeneratorCoefficients(beta=beta, m=0.5, gamma=0.1, C=0.2, M=M, B=B)


def _dentro(media, amostras, n_erros=4.0):
    erro_padrao = np.std(amostras) / math.sqrt(len(amostras))
    return abs(np.mean(amostras) - media) <= n_erros * erro_padrao + 1e-12


class TestCoeficientesGerador:
    """Testes para as integrais contra ν e os coeficientes do gerador"""

    def test_integrais_contra_monte_carlo(self, ig_padrao):
        """Teste: cada integral por quadratura bate com Monte Carlo em 4 erros-padrão"""
        unit = integrais_unitarias(ig_padrao)
        x = ig_sample(ig_padrao, 400_000, seed=2024)
        log1p = np.log1p(x)

        assert _dentro(unit.beta, np.minimum(1.0, x) * x)
        assert _dentro(unit.m, np.where(x > 1, x, 0.0))
        assert _dentro(unit.gamma, np.where(x <= 1, log1p ** 2 - x, 0.0))
        assert _dentro(unit.C, log1p / (1.0 + log1p))
        assert _dentro(unit.salto, log1p)

    def test_massa_total(self, ig_padrao):
        """Teste: ∫ν = 1, logo M = a"""
        c = generator_coeffs(JumpHypothesis(a=1.0, nu=ig_padrao, sigma=1.0))
        assert c.M == pytest.approx(1.0, abs=1e-8)

        c = generator_coeffs(JumpHypothesis(a=2.5, nu=ig_padrao, sigma=1.0))
        assert c.M == pytest.approx(2.5, abs=1e-8)

    def test_relacoes_entre_coeficientes(self, ig_padrao):
        """Teste: β escala com a/σ e B = 2(C + γ)/β²"""
        a, sigma = 1.5, 2.0
        unit = integrais_unitarias(ig_padrao)
        c = generator_coeffs(JumpHypothesis(a=a, nu=ig_padrao, sigma=sigma))

        assert c.beta == pytest.approx(-(a / sigma) * unit.beta)
        assert c.m == pytest.approx(a * unit.m)
        assert c.gamma == pytest.approx(c.m - c.beta ** 2 / 2 + a * unit.gamma)
        assert c.B == pytest.approx(2 * (c.C + c.gamma) / c.beta ** 2)

    def test_linear_em_a(self, ig_padrao):
        """Teste: β, m, C e M dobram quando a dobra; γ não"""
        um = generator_coeffs(JumpHypothesis(a=0.7, nu=ig_padrao, sigma=1.3))
        dois = generator_coeffs(JumpHypothesis(a=1.4, nu=ig_padrao, sigma=1.3))

        for nome in ("beta", "m", "C", "M"):
            assert getattr(dois, nome) == pytest.approx(2 * getattr(um, nome), rel=1e-12)
        assert dois.gamma != pytest.approx(2 * um.gamma, rel=1e-6)

    def test_termo_log_alternativo(self, ig_padrao):
        """Teste: log((1+x)²) muda apenas γ"""
        hyp = JumpHypothesis(a=1.0, nu=ig_padrao, sigma=1.0)
        padrao = generator_coeffs(hyp, "squared_log")
        alternativo = generator_coeffs(hyp, "log_of_square")

        assert alternativo.beta == pytest.approx(padrao.beta)
        assert alternativo.C == pytest.approx(padrao.C)
        assert alternativo.gamma != pytest.approx(padrao.gamma)

    def test_termo_log_desconhecido(self, ig_padrao):
        """Teste: chave inválida é ValidationError"""
        with pytest.raises(ValidationError):
            generator_coeffs(JumpHypothesis(a=1.0, nu=ig_padrao, sigma=1.0), "cubo")

    def test_hipotese_degenerada(self, ig_padrao):
        """Teste: a = 0 não define teste"""
        with pytest.raises(DomainError, match="a = 0"):
            generator_coeffs(JumpHypothesis(a=0.0, nu=ig_padrao, sigma=1.0))

    def test_k_integral(self, ig_padrao):
        """Teste: ∫K(dy) = a e a = 0 zera a integral"""
        assert k_integral(lambda y: np.ones_like(y), 2.0, ig_padrao) == pytest.approx(2.0, abs=1e-8)
        assert k_integral(lambda y: y, 0.0, ig_padrao) == 0.0


class TestEnvelopes:
    """Testes para os envelopes f, g e a fronteira direita"""

    def test_condicoes_de_contorno(self):
        """Teste: f(l) = g(l) = 1 e f(r) = g(r) = 0 para coeficientes aleatórios"""
        rng = np.random.default_rng(0)
        for _ in range(200):
            c = _coeficientes(B=rng.uniform(-3, 3), M=rng.uniform(0.01, 5), beta=-rng.uniform(0.1, 4))
            rule = DecisionRule(l=-rng.uniform(0.1, 3), r=rng.uniform(0.1, 10))

            assert super_solution_f(rule.l, rule, c) == pytest.approx(1.0, abs=1e-12)
            assert super_solution_f(rule.r, rule, c) == pytest.approx(0.0, abs=1e-12)
            assert sub_solution_g(rule.l, rule, c) == pytest.approx(1.0, abs=1e-12)
            assert sub_solution_g(rule.r, rule, c) == pytest.approx(0.0, abs=1e-12)

    def test_raizes_resolvem_as_equacoes(self):
        """Teste: f(0) e g(0) valem 1 − α₀ na raiz de cada envelope"""
        rng = np.random.default_rng(1)
        alpha0, l = 0.1, -1.0
        verificados = 0

        for _ in range(200):
            c = _coeficientes(B=rng.uniform(-1, 3), M=rng.uniform(0.01, 3), beta=-rng.uniform(0.2, 3))
            solucao = solve_right_boundary(alpha0, l, c, r_max=50.0, strict=False)

            if solucao.r_f is not None:
                f0 = super_solution_f(0.0, DecisionRule(l, solucao.r_f, alpha0), c)
                assert abs(f0 - (1 - alpha0)) <= 1e-9
                verificados += 1

            if solucao.r_g is not None:
                g0 = sub_solution_g(0.0, DecisionRule(l, solucao.r_g, alpha0), c)
                assert abs(g0 - (1 - alpha0)) <= 1e-9
                verificados += 1

        assert verificados > 100

    def test_raiz_f_forma_fechada(self):
        """Teste: r_f = ln((1 − (1−α₀)e^{2Bl})/α₀)/(2B)"""
        alpha0, l = 0.1, -1.0
        for B in (0.05, 0.5, 1.0, 2.0):
            esperado = math.log((1 - (1 - alpha0) * math.exp(2 * B * l)) / alpha0) / (2 * B)
            assert raiz_envelope_f(alpha0, l, _coeficientes(B)) == pytest.approx(esperado, abs=1e-9)

    def test_raiz_f_limite_linear(self):
        """Teste: B → 0 usa a forma linear r = −l(1−α₀)/α₀"""
        assert raiz_envelope_f(0.1, -1.0, _coeficientes(0.0)) == pytest.approx(9.0)
        assert raiz_envelope_f(0.1, -1.0, _coeficientes(1e-9)) == pytest.approx(9.0, rel=1e-6)

    def test_fronteira_e_media_das_raizes(self):
        """Teste: r = (r_f + r_g)/2 quando ambas existem"""
        c = _coeficientes(B=1.0, M=1.0, beta=-1.0)
        solucao = solve_right_boundary(0.1, -1.0, c)
        assert solucao.r == pytest.approx(0.5 * (solucao.r_f + solucao.r_g))
        assert solucao.r > 0

    def test_sem_raiz_estrito(self):
        """Teste: sem raiz positiva levanta BoundarySolveError com os coeficientes"""
        c = _coeficientes(B=-5.0, M=0.01, beta=-1.0)
        with pytest.raises(BoundarySolveError) as excinfo:
            solve_right_boundary(0.1, -1.0, c, r_max=5.0)
        assert excinfo.value.coeficientes["B"] == -5.0

    def test_sem_raiz_tolerante(self, caplog):
        """Teste: modo tolerante cai em r_max com aviso"""
        c = _coeficientes(B=-5.0, M=0.01, beta=-1.0)
        with caplog.at_level(logging.WARNING):
            solucao = solve_right_boundary(0.1, -1.0, c, r_max=5.0, strict=False)

        assert solucao.r_f is None
        assert solucao.r == 5.0 or solucao.r_g is not None
        assert caplog.records

    def test_ponto_fora_do_intervalo(self):
        """Teste: x fora de [l, r] é DomainError"""
        rule = DecisionRule(-1.0, 2.0)
        with pytest.raises(DomainError):
            super_solution_f(3.0, rule, _coeficientes(1.0))

    def test_regra_invalida(self):
        """Teste: l < 0 < r é obrigatório"""
        with pytest.raises(ValidationError):
            DecisionRule(l=0.5, r=2.0)


class TestSimulacao:
    """Testes para a simulação de u_t e a componente de saltos"""

    def test_contagens_somam(self, ig_padrao):
        """Teste: direita + esquerda + sem saída = n_sims"""
        hyp = JumpHypothesis(a=1.0, nu=ig_padrao, sigma=1.0)
        c = generator_coeffs(hyp)
        resultado = simulate_loglikelihood(c, hyp, DecisionRule(-1.0, 2.0), 200, t_max=1.0, dt=1e-2, seed=3)
        assert resultado.exits_right + resultado.exits_left + resultado.no_exit == 200

    def test_deterministica_e_independente_de_workers(self, ig_padrao):
        """Teste: mesma semente, mesmas contagens, com 1 ou 2 processos"""
        hyp = JumpHypothesis(a=1.0, nu=ig_padrao, sigma=1.0)
        c = generator_coeffs(hyp)
        rule = DecisionRule(-1.0, 2.0)

        um = simulate_loglikelihood(c, hyp, rule, 5000, t_max=0.3, dt=1e-2, seed=8, workers=1)
        dois = simulate_loglikelihood(c, hyp, rule, 5000, t_max=0.3, dt=1e-2, seed=8, workers=2)
        assert um == dois

    def test_sem_saida_no_horizonte(self, ig_padrao):
        """Teste: intervalo enorme e horizonte curto, ninguém sai"""
        hyp = JumpHypothesis(a=1.0, nu=ig_padrao, sigma=1.0)
        c = generator_coeffs(hyp)
        resultado = simulate_loglikelihood(c, hyp, DecisionRule(-1e6, 1e6), 20, t_max=0.1, dt=1e-2, seed=0)
        assert resultado.no_exit == 20

    def test_deriva_dos_saltos(self, ig_padrao):
        """Teste: média da componente de saltos em t = t·(−∫y K(dy))"""
        hyp = JumpHypothesis(a=1.0, nu=ig_padrao, sigma=1.0)
        amostras = sample_jump_component(hyp, 1.0, 100_000, seed=4)
        assert _dentro(jump_drift(hyp), amostras)
        assert np.all(amostras <= 0)

    def test_dinamica_u(self):
        """Teste: triplet usa (γ, saltos −y); generator usa (−C, saltos +y)"""
        c = _coeficientes(1.0)
        assert dinamica_u(c, "triplet") == (0.1, -1.0)
        assert dinamica_u(c, "generator") == (-0.2, 1.0)

        with pytest.raises(ValidationError, match="dynamics"):
            dinamica_u(c, "mirror")

    def test_sentido_dos_saltos(self, ig_padrao):
        """Teste: sem deriva e com difusão desprezível, só saltos positivos cruzam r"""
        c = GeneratorCoefficients(beta=-1e-3, m=0.0, gamma=0.0, C=0.0, M=5.0, B=1.0)
        hyp = JumpHypothesis(a=5.0, nu=ig_padrao, sigma=1.0)
        rule = DecisionRule(-1.0, 0.05)

        gerador = simulate_loglikelihood(c, hyp, rule, 200, t_max=2.0, dt=1e-2, seed=6, dynamics="generator")
        tripleto = simulate_loglikelihood(c, hyp, rule, 200, t_max=2.0, dt=1e-2, seed=6, dynamics="triplet")

        assert gerador.exits_right >= 195
        assert tripleto.exits_right == 0
        assert tripleto.exits_left > 0


class TestAjusteInclinacao:
    """Testes para fit_tilt_a"""

    def test_recupera_inclinacao(self, ig_padrao):
        """Teste: â dentro de ±25% de a₀ em pelo menos 15 de 20 sementes"""
        for a0 in (0.5, 1.0, 2.0):
            acertos = sum(
                abs(fit_tilt_a(sample_tilted(a0, ig_padrao, 10_000, seed=s), ig_padrao) - a0) <= 0.25 * a0
                for s in range(20)
            )
            assert acertos >= 15

    def test_media_abaixo_de_m1(self, ig_padrao):
        """Teste: saltos menores que a média de ν dão a = 0"""
        assert fit_tilt_a([0.2, 0.5, 0.9], ig_padrao) == 0.0

    def test_limite_a_max(self, ig_padrao, caplog):
        """Teste: média no polo ou acima é limitada em a_max com aviso"""
        with caplog.at_level(logging.WARNING):
            assert fit_tilt_a([3.0, 4.0], ig_padrao, a_max=50.0) == 50.0
            assert fit_tilt_a([1.95, 1.96], ig_padrao, a_max=10.0) == 10.0

        assert len(caplog.records) == 2

    def test_sem_saltos(self, ig_padrao):
        """Teste: amostra vazia é FitError"""
        with pytest.raises(FitError):
            fit_tilt_a([], ig_padrao)


class TestDetect:
    """Testes para o detector de uma janela"""

    def test_janela_sem_quedas_e_degenerada(self, ig_padrao, detector_rapido):
        """Teste: preços crescentes dão a = 0, rótulo 0 e nenhuma saída"""
        registro = detect(np.linspace(100, 110, 31), ig_padrao, config=detector_rapido)

        assert registro.a_hat == 0.0
        assert registro.label == 0
        assert registro.no_exits == detector_rapido.n_sims
        assert registro.r is None

    def test_registro_completo(self, ig_padrao, detector_rapido):
        """Teste: janela com quedas grandes produz registro com fronteira"""
        precos = 100 * np.cumprod(np.r_[1.0, np.tile([1.05, 0.96], 15)])
        registro = detect(precos, ig_padrao, seed=5, config=detector_rapido, inicio=12)

        assert registro.period_start_index == 12
        assert registro.a_hat > 0
        assert registro.r > 0
        assert registro.right_exits + registro.left_exits + registro.no_exits == detector_rapido.n_sims
        assert registro.label == int(registro.right_exits >= detector_rapido.p_star)
        assert registro.right_exit_freq == registro.right_exits

    def test_invariante_a_escala_dos_precos(self, ig_padrao, detector_rapido):
        """Teste: multiplicar os preços por 10 não muda o registro"""
        precos = np.array([100, 104, 97, 101, 95, 99, 92, 98, 93, 97, 90, 96, 91, 95, 89, 94,
                           90, 96, 92, 97, 91, 95, 90, 94, 88, 93, 89, 95, 90, 96, 91], dtype=float)

        original = detect(precos, ig_padrao, seed=21, config=detector_rapido)
        escalado = detect(10 * precos, ig_padrao, seed=21, config=detector_rapido)

        assert original.a_hat > 0
        assert original.to_dict() == escalado.to_dict()

    def test_deterministico(self, ig_padrao, detector_rapido):
        """Teste: mesma semente, mesmo registro"""
        precos = 100 * np.cumprod(np.r_[1.0, np.tile([1.03, 0.975, 1.01], 10)])
        r1 = detect(precos, ig_padrao, seed=9, config=detector_rapido)
        r2 = detect(precos, ig_padrao, seed=9, config=detector_rapido)
        assert r1.to_dict() == r2.to_dict()

    def test_sobrescritas(self, ig_padrao, detector_rapido):
        """Teste: p_star acima de n_sims é rejeitado"""
        with pytest.raises(ValidationError, match="p_star"):
            detect(np.linspace(100, 90, 31), ig_padrao, p_star=11, config=detector_rapido)

    def test_janela_curta(self, ig_padrao):
        """Teste: menos de 2 preços é erro"""
        with pytest.raises(ValidationError):
            detect([100.0], ig_padrao)


class TestJanelas:
    """Testes para TesteSequencialService.detectar_janelas"""

    def test_um_registro_por_janela(self, ig_padrao, detector_rapido, serie_curta):
        """Teste: L − n janelas com índices 0..L−n−1"""
        n = 10
        precos = serie_curta.closes[:60]
        registros = TesteSequencialService(detector_rapido).detectar_janelas(precos, ig_padrao, n, semente=1)

        assert len(registros) == 60 - n
        assert [r.period_start_index for r in registros] == list(range(60 - n))

    def test_reproduz_em_isolamento(self, ig_padrao, detector_rapido, serie_curta):
        """Teste: cada janela reproduz com a semente derivada de (semente, j)"""
        n = 10
        precos = serie_curta.closes[:40]
        registros = TesteSequencialService(detector_rapido).detectar_janelas(precos, ig_padrao, n, semente=77)

        for j in (0, 7, 29):
            isolado = detect(precos[j:j + n + 1], ig_padrao, seed=derivar_semente(77, j),
                             config=detector_rapido, inicio=j)
            assert isolado.to_dict() == registros[j].to_dict()

    def test_serie_curta_demais(self, ig_padrao, detector_rapido):
        """Teste: menos de n+1 preços é erro"""
        with pytest.raises(ValidationError, match="n\\+1"):
            TesteSequencialService(detector_rapido).detectar_janelas(np.linspace(1, 2, 10), ig_padrao, 10, 0)


class TestAuxiliaresDetector:
    """Testes para saltos negativos e linha de base ingênua"""

    def test_saltos_negativos(self):
        """Teste: magnitudes das variações percentuais negativas"""
        saltos = saltos_negativos([100.0, 90.0, 99.0, 99.0, 49.5])
        np.testing.assert_allclose(saltos, [10.0, 50.0])

    def test_naive_classify(self):
        """Teste: 1 se a média do período supera a do treino"""
        assert naive_classify([2.0, 3.0], [1.0, 2.0]) == 1
        assert naive_classify([1.0], [1.0, 2.0]) == 0

        with pytest.raises(ValidationError):
            naive_classify([], [1.0])
