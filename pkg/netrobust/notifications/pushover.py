"""
Pushover-Benachrichtigungen für lange Experimentläufe.
"""

import logging
from typing import Optional

from pushover_complete import PushoverAPI

from ..config.settings import PUSHOVER_USER_KEY, PUSHOVER_API_TOKEN, PUSHOVER_PRIORITY, PUSHOVER_SOUND

logger = logging.getLogger(__name__)


class PushoverNotifier:
    """Meldet abgeschlossene oder abgebrochene Läufe via Pushover."""

    def __init__(self, user_key: str = None, api_token: str = None):
        """
        Args:
            user_key: Pushover User Key (optional, sonst PUSHOVER_USER_KEY)
            api_token: Pushover API Token (optional, sonst PUSHOVER_API_TOKEN)
        """
        self.user_key = user_key or PUSHOVER_USER_KEY
        self.api_token = api_token or PUSHOVER_API_TOKEN
        self.enabled = bool(self.user_key and self.api_token)

        if self.enabled:
            logger.debug("[OK] Pushover Benachrichtigungen aktiviert")
        else:
            logger.debug("[INFO] Keine Pushover Credentials - Benachrichtigungen nur im Log")

    def send_experiment_finished(self, name: str, runtime: float, rows: int, out_path: Optional[str] = None):
        """
        Meldet ein fertiges Experiment.

        Args:
            name: Experimentname (a, b, d, ...)
            runtime: Laufzeit in Sekunden
            rows: Anzahl Ergebniszeilen
            out_path: Ausgabedatei (None = stdout)
        """
        minutes, seconds = divmod(int(round(runtime)), 60)
        title = f"[OK] Experiment {name} fertig"
        message = f"Laufzeit: {minutes}m {seconds:02d}s\n"
        message += f"Zeilen: {rows}\n"
        message += f"Ausgabe: {out_path or 'stdout'}"

        if not self.enabled:
            logger.info(f"[DRY RUN] {title} - {message.replace(chr(10), ' | ')}")
            return
        self._send_notification(title, message)

    def send_alert(self, title: str, message: str, priority: int = 0):
        """
        Allgemeine Meldung, z.B. bei Abbruch eines Laufs.

        Args:
            priority: -2=lowest, -1=low, 0=normal, 1=high, 2=emergency
        """
        if not self.enabled:
            logger.info(f"[DRY RUN] Alert: {title} - {message}")
            return
        self._send_notification(title, message, priority=priority)

    def _send_notification(self, title: str, message: str, priority: int = None):
        if not self.enabled:
            return

        try:
            api = PushoverAPI(self.api_token)
            api.send_message(
                self.user_key,
                message,
                title=title,
                priority=priority if priority is not None else PUSHOVER_PRIORITY,
                sound=PUSHOVER_SOUND,
            )
            logger.info(f"[OK] Pushover gesendet: {title}")
        except Exception as e:
            # Ein fehlgeschlagener Versand darf kein Ergebnis verwerfen
            logger.error(f"[FEHLER] Pushover Fehler: {e}")

    def test_notification(self) -> bool:
        """Sendet eine Test-Benachrichtigung."""
        if not self.enabled:
            logger.error("[FEHLER] Pushover nicht konfiguriert (PUSHOVER_USER_KEY / PUSHOVER_API_TOKEN)")
            return False

        self._send_notification(
            "[TEST] netrobust",
            "Test-Benachrichtigung erfolgreich!\n\nExperimentläufe melden sich nach Abschluss.",
            priority=0,
        )
        return True
