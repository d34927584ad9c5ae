import csv
import json
import logging
from pathlib import Path
from typing import IO, Any, Dict, List, Optional

EVENT_HEADER = ["Seq", "Kind", "Message"]


def _open_sink(path: Path, what: str) -> Optional[IO[str]]:
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        logging.error("Failed to open %s %s: %s", what, path, exc)
        return None


class RunLogger:
    """
    Run events (config resolved, solver milestones, sweep points) written to
    events.csv and events.jsonl in the output directory.

    Events are numbered, not timestamped: two runs with the same seed leave
    identical files.
    """

    def __init__(self, out_dir: Path, csv_name: str = "events.csv", jsonl_name: str = "events.jsonl"):
        self.out_dir = Path(out_dir)
        self.log_file = self.out_dir / csv_name
        self.jsonl_file = self.out_dir / jsonl_name
        self.events: List[Dict[str, Any]] = []
        self._csv = _open_sink(self.log_file, "event log")
        self._jsonl = _open_sink(self.jsonl_file, "jsonl event log")
        self._write_row(EVENT_HEADER)

    def _write_row(self, row: List[Any]) -> None:
        if self._csv is None:
            return
        csv.writer(self._csv).writerow(row)
        self._csv.flush()

    def _write_json(self, event: Dict[str, Any]) -> None:
        if self._jsonl is None:
            return
        try:
            self._jsonl.write(json.dumps(event, sort_keys=True) + "\n")
            self._jsonl.flush()
        except (TypeError, ValueError, OSError) as exc:
            logging.error("Failed to write jsonl event: %s", exc)

    def log_event(self, kind: str, message: str, metadata: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Record one event in both files and mirror it to the process logger."""
        seq = len(self.events) + 1
        event: Dict[str, Any] = dict(metadata or {})
        event.update(seq=seq, kind=kind, message=message)
        self.events.append(event)
        logging.info("[%s] %s", kind, message)
        self._write_row([seq, kind, message])
        self._write_json(event)
        return event

    def close(self) -> None:
        for name in ("_csv", "_jsonl"):
            sink = getattr(self, name)
            if sink is not None:
                sink.close()
                setattr(self, name, None)

    def __enter__(self) -> "RunLogger":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
