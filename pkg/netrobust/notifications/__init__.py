# Notifications module
from .pushover import PushoverNotifier
