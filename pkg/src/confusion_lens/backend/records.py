"""Token records: model tokens aligned to character spans of the source."""

from dataclasses import dataclass
from typing import Optional

from ..corpus import CharSpan
from ..errors import DataError


@dataclass(frozen=True)
class TokenRecord:
    index: int
    text: str
    span: CharSpan
    logprob: Optional[float]  # natural log; None for the first token

    @property
    def start(self) -> int:
        return self.span.start

    @property
    def end(self) -> int:
        return self.span.end


def validate_records(source: str, records: list[TokenRecord]) -> None:
    """Check the partition property: sorted, contiguous, full coverage."""
    if not records:
        raise DataError("no token records")
    pos = 0
    for rec in records:
        if rec.start != pos:
            raise DataError(
                f"token spans not contiguous at offset {pos} (token {rec.index})"
            )
        if rec.logprob is not None and rec.logprob > 0:
            raise DataError(f"token {rec.index}: logprob {rec.logprob} > 0")
        pos = rec.end
    if pos != len(source):
        raise DataError(
            f"token spans cover [0,{pos}) but source has length {len(source)}"
        )


def records_to_dicts(records: list[TokenRecord]) -> list[dict]:
    return [
        {
            "index": r.index,
            "text": r.text,
            "start": r.start,
            "end": r.end,
            "logprob": r.logprob,
        }
        for r in records
    ]


def records_from_dicts(rows: list[dict]) -> list[TokenRecord]:
    records = []
    for row in rows:
        records.append(
            TokenRecord(
                index=int(row["index"]),
                text=row["text"],
                span=CharSpan(int(row["start"]), int(row["end"])),
                logprob=row.get("logprob"),
            )
        )
    return records
