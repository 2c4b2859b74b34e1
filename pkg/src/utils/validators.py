import math
from datetime import date, datetime

import numpy as np


class ValidationError(Exception):
    """Exceção customizada para erros de validação"""
    pass


class DomainError(ValidationError):
    """Argumento fora do domínio de uma operação"""
    pass


class DivergenceError(DomainError):
    """Transformada cumulante (ou de Laplace) fora da faixa de convergência"""
    pass


class FitError(ValidationError):
    """Ajuste de distribuição impossível com as amostras fornecidas"""
    pass


class IngestionError(ValidationError):
    """Falha ao ler uma série de preços"""
    pass


class ConfigError(ValidationError):
    """Configuração de execução inválida"""
    pass


class RebalanceError(ValidationError):
    """Quadro sem as duas classes não pode ser rebalanceado"""
    pass


class TrainingError(ValidationError):
    """Quadro de treino inadequado para o classificador"""
    pass


class QuadratureError(Exception):
    """Quadratura não convergiu; carrega a estimativa parcial"""

    def __init__(self, mensagem, estimativa_parcial):
        super().__init__(mensagem)
        self.estimativa_parcial = estimativa_parcial


class BoundarySolveError(Exception):
    """Não existe fronteira direita positiva para os coeficientes dados"""

    def __init__(self, mensagem, coeficientes=None):
        super().__init__(mensagem)
        self.coeficientes = coeficientes


class ValidadorNumerico:
    @staticmethod
    def validar_real(nome, valor):
        """Valida que o valor é um real finito"""
        if valor is None:
            raise ValidationError(f"{nome} é obrigatório")

        try:
            valor = float(valor)
        except (ValueError, TypeError):
            raise ValidationError(f"{nome} deve ser um número")

        if not math.isfinite(valor):
            raise ValidationError(f"{nome} deve ser finito")

        return valor

    @staticmethod
    def validar_positivo(nome, valor):
        """Valida real estritamente positivo"""
        valor = ValidadorNumerico.validar_real(nome, valor)

        if valor <= 0:
            raise ValidationError(f"{nome} deve ser maior que zero")

        return valor

    @staticmethod
    def validar_nao_negativo(nome, valor):
        """Valida real maior ou igual a zero"""
        valor = ValidadorNumerico.validar_real(nome, valor)

        if valor < 0:
            raise ValidationError(f"{nome} não pode ser negativo")

        return valor

    @staticmethod
    def validar_intervalo(nome, valor, minimo, maximo, aberto=False):
        """
        Valida real dentro de [minimo, maximo] (ou (minimo, maximo) se aberto=True)
        """
        valor = ValidadorNumerico.validar_real(nome, valor)

        if aberto:
            if not (minimo < valor < maximo):
                raise ValidationError(f"{nome} deve estar em ({minimo}, {maximo})")
        elif not (minimo <= valor <= maximo):
            raise ValidationError(f"{nome} deve estar em [{minimo}, {maximo}]")

        return valor

    @staticmethod
    def validar_inteiro_positivo(nome, valor, minimo=1):
        """Valida inteiro >= minimo"""
        if valor is None:
            raise ValidationError(f"{nome} é obrigatório")

        if isinstance(valor, bool) or not isinstance(valor, (int, np.integer)):
            if isinstance(valor, float) and valor.is_integer():
                valor = int(valor)
            else:
                raise ValidationError(f"{nome} deve ser um inteiro")

        valor = int(valor)
        if valor < minimo:
            raise ValidationError(f"{nome} deve ser pelo menos {minimo}")

        return valor


class ValidadorAmostras:
    @staticmethod
    def validar_positivas(amostras, minimo=1, nome="amostras"):
        """
        Converte para array float e exige pelo menos `minimo` valores, todos > 0
        """
        if amostras is None:
            raise FitError(f"{nome} são obrigatórias")

        valores = np.asarray(amostras, dtype=float).ravel()

        if valores.size < minimo:
            raise FitError(f"São necessárias pelo menos {minimo} {nome}, recebidas {valores.size}")

        if not np.all(np.isfinite(valores)):
            raise FitError(f"{nome} devem ser finitas")

        if np.any(valores <= 0):
            raise FitError(f"Todas as {nome} devem ser positivas")

        return valores

    @staticmethod
    def validar_precos(precos, minimo=2):
        """Valida janela de preços (todos positivos, pelo menos `minimo` pontos)"""
        valores = np.asarray(precos, dtype=float).ravel()

        if valores.size < minimo:
            raise ValidationError(f"A janela deve ter pelo menos {minimo} preços")

        if not np.all(np.isfinite(valores)) or np.any(valores <= 0):
            raise ValidationError("Preços devem ser finitos e positivos")

        return valores


class ValidadorSerie:
    @staticmethod
    def validar_data(valor, linha):
        """Converte uma célula de data ISO-8601; o erro nomeia a linha"""
        if isinstance(valor, datetime):
            return valor.date()

        if isinstance(valor, date):
            return valor

        try:
            return datetime.strptime(str(valor).strip()[:10], "%Y-%m-%d").date()
        except ValueError:
            raise IngestionError(f"Linha {linha}: data '{valor}' deve estar no formato YYYY-MM-DD")

    @staticmethod
    def validar_fechamento(valor, linha):
        """Converte uma célula de fechamento; deve ser decimal positivo"""
        try:
            fechamento = float(valor)
        except (ValueError, TypeError):
            raise IngestionError(f"Linha {linha}: fechamento '{valor}' não é um número")

        if not math.isfinite(fechamento) or fechamento <= 0:
            raise IngestionError(f"Linha {linha}: fechamento deve ser positivo (recebido {valor})")

        return fechamento
