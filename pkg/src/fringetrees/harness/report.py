"""Report emission as JSON (one document per scenario) or CSV (one row per
grid point and target)."""
import csv
import io
import json

CSV_COLUMNS = (
    "scenario",
    "grid_index",
    "n",
    "target",
    "target_size",
    "replicates",
    "empirical_mean",
    "empirical_variance",
    "exact_mean",
    "exact_variance",
    "regime",
    "predicted_lambda",
    "tv_poisson",
    "ks_statistic",
    "ks_pvalue",
    "delta",
    "cai_devroye",
    "flags",
    "histogram",
)
CSV_HEADER = ",".join(CSV_COLUMNS)


def report_to_json(report):
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=False) + "\n"


def report_from_json(text):
    return json.loads(text)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_rows(report):
    for point in report["points"]:
        for tgt in point["targets"]:
            pred = tgt.get("prediction") or {}
            bounds = tgt.get("bounds") or {}
            hist = ";".join(f"{k}:{v}" for k, v in tgt["histogram"].items())
            yield {
                "scenario": report["scenario"],
                "grid_index": point["index"],
                "n": point["n"],
                "target": tgt["target"],
                "target_size": tgt["targetSize"],
                "replicates": tgt["replicates"],
                "empirical_mean": tgt["empiricalMean"],
                "empirical_variance": tgt["empiricalVariance"],
                "exact_mean": tgt.get("exactMean"),
                "exact_variance": tgt.get("exactVariance"),
                "regime": pred.get("regime"),
                "predicted_lambda": pred.get("lambda"),
                "tv_poisson": tgt.get("tvPoisson"),
                "ks_statistic": tgt.get("ksStatistic"),
                "ks_pvalue": tgt.get("ksPvalue"),
                "delta": bounds.get("delta"),
                "cai_devroye": bounds.get("caiDevroye"),
                "flags": "|".join(tgt.get("flags", [])),
                "histogram": hist,
            }


def report_to_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report_rows(report):
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def emit_report(report, fmt="json", path=None):
    """Render ``report`` and write it to ``path`` (or return the text if ``path`` is None)."""
    if fmt == "json":
        text = report_to_json(report)
    elif fmt == "csv":
        text = report_to_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None:
        return text
    with open(path, "w") as fh:
        fh.write(text)
    return text
