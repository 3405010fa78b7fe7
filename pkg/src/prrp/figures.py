"""Figure rendering for the experiment runner.

Each sweep that writes a CSV also renders a companion PNG next to it
(disable with --no-plot).  Stability sweeps plot growth factor and
factorization error against whichever grid axis actually varies; cost
sweeps plot the message count against the processor count.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _series_key(row, xkey):
    parts = [row["algorithm"], row["family"]]
    for extra in ("n", "b", "p", "tree"):
        if extra != xkey and row.get(extra) not in ("", None):
            parts.append(f"{extra}={row[extra]}")
    return " ".join(parts)


def _float(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        return None


def render_stability_figure(rows, path):
    ok = [r for r in rows if r.get("status") == "ok" and _float(r.get("g_w"))]
    if not ok:
        return False
    for xkey in ("n", "b", "p"):
        vals = {r.get(xkey) for r in ok if r.get(xkey) not in ("", None)}
        if len(vals) > 1:
            break
    else:
        xkey = "b"
    fig, (ax_gw, ax_err) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    series = {}
    for r in ok:
        x = _float(r.get(xkey))
        if x is None:
            continue
        series.setdefault(_series_key(r, xkey), []).append(
            (x, _float(r["g_w"]), _float(r.get("rel_fact_error"))))
    for label, pts in sorted(series.items()):
        pts.sort()
        xs = [p[0] for p in pts]
        ax_gw.plot(xs, [p[1] for p in pts], "o-", label=label)
        errs = [(x, e) for x, _, e in pts if e is not None and e > 0]
        if errs:
            ax_err.semilogy([x for x, _ in errs], [e for _, e in errs], "o-",
                            label=label)
    ax_gw.set_xlabel(xkey)
    ax_gw.set_ylabel("growth factor")
    gws = [p[1] for pts in series.values() for p in pts if p[1]]
    if gws and max(gws) / max(min(gws), 1e-300) > 1e3:
        ax_gw.set_yscale("log")
    ax_err.set_xlabel(xkey)
    ax_err.set_ylabel("||PA - LU||_F / ||A||_F")
    if len(series) <= 12:
        ax_gw.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def render_cost_figure(rows, path):
    if not rows:
        return False
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    series = {}
    for r in rows:
        p = _float(r.get("p"))
        msgs = _float(r.get("messages"))
        if p and msgs:
            series.setdefault(r["algorithm"], []).append((p, msgs))
    for label, pts in sorted(series.items()):
        pts.sort()
        ax.loglog([q[0] for q in pts], [q[1] for q in pts], "o-", label=label)
    ax.set_xlabel("processors")
    ax.set_ylabel("messages on the critical path")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True
