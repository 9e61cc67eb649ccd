from core.logger import logger
from core.ports.storage_port import StoragePort
from core.services.campaign_service import CampaignResult


def save_campaign(storage: StoragePort, name: str, result: CampaignResult) -> list[str]:
    """레코드/요약 CSV 와 표 텍스트를 reports/ 에 저장하고 경로를 반환합니다."""
    records = f"reports/{name}_records.csv"
    summary = f"reports/{name}_summary.csv"
    table = f"reports/{name}_table.txt"
    storage.save_dataframe_csv(result.records, records, index=False)
    storage.save_dataframe_csv(result.summary, summary, index=False)
    storage.put_file(table, (result.table + "\n").encode("utf-8"))
    logger.info(f"[CLI:{name}] 결과 저장: {records}, {summary}, {table}")
    return [records, summary, table]
