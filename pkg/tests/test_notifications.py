import logging

import pytest

from netrobust.notifications import pushover
from netrobust.notifications.pushover import PushoverNotifier


class RecordingAPI:
    sent = []

    def __init__(self, token):
        self.token = token

    def send_message(self, user, message, **kwargs):
        RecordingAPI.sent.append((self.token, user, message, kwargs))


@pytest.fixture
def recording_api(monkeypatch):
    RecordingAPI.sent = []
    monkeypatch.setattr(pushover, "PushoverAPI", RecordingAPI)
    return RecordingAPI


def test_without_credentials_only_logs(recording_api, caplog):
    notifier = PushoverNotifier(user_key="", api_token="")
    notifier.enabled = False
    with caplog.at_level(logging.INFO):
        notifier.send_experiment_finished("a", 125.0, 9, "results/a.csv")
        notifier.send_alert("Abbruch", "Fehler")
    assert recording_api.sent == []
    assert "[DRY RUN]" in caplog.text
    assert "2m 05s" in caplog.text
    assert notifier.test_notification() is False


def test_experiment_finished_message(recording_api):
    notifier = PushoverNotifier(user_key="user", api_token="token")
    notifier.send_experiment_finished("b", 61.0, 12)
    token, user, message, kwargs = recording_api.sent[0]
    assert (token, user) == ("token", "user")
    assert kwargs["title"] == "[OK] Experiment b fertig"
    assert "Zeilen: 12" in message and "Ausgabe: stdout" in message


def test_alert_priority_and_test_message(recording_api):
    notifier = PushoverNotifier(user_key="user", api_token="token")
    notifier.send_alert("Abbruch", "Fehler", priority=1)
    assert notifier.test_notification() is True
    assert [sent[3]["priority"] for sent in recording_api.sent] == [1, 0]


def test_failed_delivery_is_logged(monkeypatch, caplog):
    class BrokenAPI:
        def __init__(self, token):
            pass

        def send_message(self, *args, **kwargs):
            raise RuntimeError("offline")

    monkeypatch.setattr(pushover, "PushoverAPI", BrokenAPI)
    with caplog.at_level(logging.ERROR):
        PushoverNotifier(user_key="user", api_token="token").send_alert("Abbruch", "Fehler")
    assert "offline" in caplog.text
