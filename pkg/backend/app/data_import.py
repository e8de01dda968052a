from datetime import datetime
from pathlib import Path
from typing import List, Optional
from app.tvbarc import CountSeries
import numpy as np
import pandas as pd
import logging

logger = logging.getLogger(__name__)

ALLOWED_EXTENSIONS = [".csv", ".xlsx"]

# accepted (label column, count column) header pairs
HEADER_LAYOUTS = [("date", "count"), ("t", "x")]


class CountDataError(ValueError):
    pass


def parse_date(date_value) -> Optional[str]:
    """Parse a date cell to an ISO date string, None if it is not a date"""
    if date_value is None or (not isinstance(date_value, str) and pd.isna(date_value)):
        return None

    if isinstance(date_value, str):
        date_str = date_value.strip()
        for fmt in ['%Y-%m-%d', '%d/%m/%Y', '%m/%d/%Y', '%Y-%m-%d %H:%M:%S', '%d-%m-%Y', '%m-%d-%Y']:
            try:
                return datetime.strptime(date_str, fmt).date().isoformat()
            except ValueError:
                continue
        return None

    if hasattr(date_value, 'isoformat'):
        return date_value.date().isoformat() if hasattr(date_value, 'date') else date_value.isoformat()
    return None


def clean_dataframe(df: pd.DataFrame) -> pd.DataFrame:
    """Drop empty rows and normalize column names"""
    df = df.dropna(how='all')
    df.columns = (
        df.columns.astype(str)
        .str.lower()
        .str.replace(r"[^a-z0-9]+", "_", regex=True)
        .str.strip("_")
    )
    return df


def read_table(path: Path) -> pd.DataFrame:
    """Read a CSV or Excel file with every cell as text"""
    extension = path.suffix.lower()
    if extension not in ALLOWED_EXTENSIONS:
        raise CountDataError(f"{path}: invalid file format, allowed formats: {', '.join(ALLOWED_EXTENSIONS)}")
    if not path.exists():
        raise CountDataError(f"{path}: file not found")

    try:
        if extension == ".csv":
            return pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True)
        return pd.read_excel(path, dtype=str, engine="openpyxl")
    except pd.errors.EmptyDataError:
        raise CountDataError(f"{path}: file is empty")
    except Exception as e:
        raise CountDataError(f"{path}: error reading file: {e}")


def parse_count(cell) -> int:
    text = str(cell).strip()
    if not text:
        raise ValueError("missing count")
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"count {text!r} is not a number")
    if not np.isfinite(value) or value != np.floor(value):
        raise ValueError(f"count {text!r} is not an integer")
    if value < 0:
        raise ValueError(f"count {text!r} is negative")
    return int(value)


def read_count_csv(path) -> CountSeries:
    """Read a `date,count` or `t,x` file into a count series, rows in file order"""
    path = Path(path)
    df = clean_dataframe(read_table(path))
    if df.empty:
        raise CountDataError(f"{path}: file has no data rows")

    layout = next(((label, count) for label, count in HEADER_LAYOUTS if label in df.columns and count in df.columns), None)
    if layout is None:
        raise CountDataError(f"{path}: expected a header of `date,count` or `t,x`, found {list(df.columns)}")
    label_col, count_col = layout

    counts: List[int] = []
    errors: List[str] = []
    # row numbers count the header as row 1
    for position, (_, row) in enumerate(df.iterrows()):
        try:
            counts.append(parse_count(row[count_col]))
        except ValueError as e:
            errors.append(f"Row {position + 2}: {e}")

    if errors:
        raise CountDataError(f"{path}: " + "; ".join(errors))

    raw_labels = df[label_col].astype(str).str.strip()
    if label_col == "date":
        labels = np.array([parse_date(value) or value for value in raw_labels], dtype=object)
    else:
        labels = raw_labels.to_numpy(dtype=object)

    logger.info(f"Read {len(counts)} observations from {path}")
    return CountSeries(values=np.asarray(counts, dtype=np.int64), labels=labels)


def write_count_csv(series: CountSeries, path) -> Path:
    """Write a series as `t,x` rows 0..T"""
    path = Path(path)
    frame = pd.DataFrame({"t": np.arange(len(series)), "x": series.values})
    frame.to_csv(path, index=False)
    return path
