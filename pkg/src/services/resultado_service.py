import json
from typing import List, Optional

from src.models import Execucao, RegistroJanela, ResultadoEstudo
from src.models.dominio import DetectionRecord, StudyReport
from src.repositories import db_config
from src.utils import ValidationError
from src.utils.sementes import validar_semente


class ResultadoService:
    def __init__(self):
        self.db_config = db_config

    def registrar_execucao(self, comando: str, semente: int, config: dict) -> Execucao:
        """
        Registra uma execução do CLI com a configuração efetiva
        """
        session = self.db_config.get_session()
        try:
            if not comando or not comando.strip():
                raise ValidationError("Comando é obrigatório")

            execucao = Execucao(
                comando=comando.strip(),
                semente=str(validar_semente(semente)),
                config_json=json.dumps(config, ensure_ascii=False, sort_keys=True)
            )

            session.add(execucao)
            session.commit()
            session.refresh(execucao)

            return execucao

        except Exception as e:
            session.rollback()
            raise e
        finally:
            session.close()

    def _obter_execucao(self, session, execucao_id: int) -> Execucao:
        execucao = session.query(Execucao).filter(Execucao.id == execucao_id).first()

        if not execucao:
            raise ValidationError(f"Execução com ID {execucao_id} não encontrada")

        return execucao

    def registrar_janelas(self, execucao_id: int, registros: List[DetectionRecord]) -> int:
        """
        Grava um registro de detecção por janela
        """
        session = self.db_config.get_session()
        try:
            self._obter_execucao(session, execucao_id)

            for registro in registros:
                session.add(RegistroJanela(execucao_id=execucao_id, **registro.to_dict()))

            session.commit()
            return len(registros)

        except Exception as e:
            session.rollback()
            raise e
        finally:
            session.close()

    def registrar_resultados_estudo(self, execucao_id: int, relatorio: StudyReport) -> int:
        session = self.db_config.get_session()
        try:
            self._obter_execucao(session, execucao_id)

            for linha in relatorio.rows:
                session.add(ResultadoEstudo(
                    execucao_id=execucao_id,
                    classe=linha.classe,
                    metodo=linha.method,
                    corretos=linha.correct,
                    total=linha.total,
                    semente=str(linha.seed)
                ))

            session.commit()
            return len(relatorio.rows)

        except Exception as e:
            session.rollback()
            raise e
        finally:
            session.close()

    def listar_execucoes(self, comando: Optional[str] = None) -> List[Execucao]:
        """
        Lista execuções, mais recentes primeiro, opcionalmente filtradas por comando
        """
        session = self.db_config.get_session()
        try:
            query = session.query(Execucao)

            if comando:
                query = query.filter(Execucao.comando == comando)

            return query.order_by(Execucao.data_execucao.desc(), Execucao.id.desc()).all()

        finally:
            session.close()

    def obter_execucao_por_id(self, execucao_id: int) -> Optional[Execucao]:
        session = self.db_config.get_session()
        try:
            return session.query(Execucao).filter(Execucao.id == execucao_id).first()
        finally:
            session.close()

    def obter_registros_execucao(self, execucao_id: int) -> List[RegistroJanela]:
        session = self.db_config.get_session()
        try:
            self._obter_execucao(session, execucao_id)
            return session.query(RegistroJanela).filter(
                RegistroJanela.execucao_id == execucao_id
            ).order_by(RegistroJanela.period_start_index).all()

        finally:
            session.close()

    def obter_resultados_estudo(self, execucao_id: int) -> List[ResultadoEstudo]:
        session = self.db_config.get_session()
        try:
            self._obter_execucao(session, execucao_id)
            return session.query(ResultadoEstudo).filter(
                ResultadoEstudo.execucao_id == execucao_id
            ).order_by(ResultadoEstudo.id).all()

        finally:
            session.close()

    def excluir_execucao(self, execucao_id: int) -> bool:
        """
        Exclui uma execução e, em cascata, seus registros e resultados
        """
        session = self.db_config.get_session()
        try:
            execucao = self._obter_execucao(session, execucao_id)

            session.delete(execucao)
            session.commit()

            return True

        except Exception as e:
            session.rollback()
            raise e
        finally:
            session.close()
