from typing import Dict, List

import pytest

from robridge.analyzer.analyzer import Analyzer
from robridge.out.model.collect_result import CollectResult
from robridge.out.model.enum.message_enum import MessageTypeEnum


@pytest.fixture
def success_data() -> Dict[str, CollectResult]:
    return {"summary": CollectResult(requested=50, written=50, expert_failures=2)}


@pytest.fixture
def failed_data() -> List[Dict[str, CollectResult]]:
    return [
        {"summary": CollectResult(requested=50, written=49, expert_failures=0)},
        {"summary": CollectResult(requested=50, written=50, expert_failures=3)},
    ]


def test_analyzer(success_data: Dict[str, CollectResult], failed_data: List[Dict[str, CollectResult]]):
    # given
    analyzer = Analyzer()

    # when
    success_status = analyzer.analyze(success_data)
    # then
    assert success_status == MessageTypeEnum.SUCCESS

    # when
    failed_statuses = [analyzer.analyze(d) for d in failed_data]
    # then
    assert all(map(lambda x: x == MessageTypeEnum.ERROR, failed_statuses))


def test_analyzer_failure_limit(failed_data: List[Dict[str, CollectResult]]):
    # given
    analyzer = Analyzer()
    # when
    status = analyzer.analyze(failed_data[1], max_failure_rate=0.1)
    # then
    assert status == MessageTypeEnum.SUCCESS


def test_failure_rate():
    # then
    assert CollectResult(requested=4, written=3, expert_failures=1).failure_rate == 0.25
    assert CollectResult(requested=0, written=0, expert_failures=0).failure_rate == 0.0
