import logging
from typing import Dict

from robridge.out.model.collect_result import CollectResult
from robridge.out.model.enum.message_enum import MessageTypeEnum


MAX_FAILURE_RATE = 0.05


class Analyzer:
    def __init__(self, *args, **kwargs):
        self.logger = logging.getLogger("robridge.analyzer")

    def analyze(self, data: Dict[str, CollectResult], *args, **kwargs) -> MessageTypeEnum:
        """
        collect 결과 판정. 요청한 trajectory 가 모두 쓰였고 expert 실패율이 한도 이하이면 SUCCESS.

        :param max_failure_rate: 기본 5%
        """
        summarized = data["summary"]
        limit = kwargs.get("max_failure_rate", MAX_FAILURE_RATE)
        if summarized.written >= summarized.requested and summarized.failure_rate <= limit:
            return MessageTypeEnum.SUCCESS
        self.logger.warning(
            f"Collect judged ERROR: written {summarized.written}/{summarized.requested}, "
            f"failure rate {summarized.failure_rate:.3f} > {limit}"
            if summarized.written >= summarized.requested
            else f"Collect judged ERROR: written {summarized.written}/{summarized.requested}"
        )
        return MessageTypeEnum.ERROR
