import json
from pathlib import Path

import pandas as pd
import streamlit as st

from sidebar import init_session_state, show_sidebar
from utils.charts import alignment_figure, curvature_figure, loss_figure
from utils.config import get_config, load_config


def list_runs(out_dir: Path):
    """CSV artifacts in the output directory, newest first"""
    if not out_dir.is_dir():
        return []
    return sorted(out_dir.glob("*.csv"), key=lambda p: p.stat().st_mtime, reverse=True)


def main():
    load_config()
    init_session_state()
    st.session_state.current_page = "Dashboard"
    show_sidebar()

    st.title("📊 Saved runs")
    out_dir = Path(get_config("out_dir", "runs"))
    runs = list_runs(out_dir)
    if not runs:
        st.info(f"No run artifacts in {out_dir} yet")
        return

    selected = st.multiselect("Runs", runs, default=runs[:1], format_func=lambda p: p.stem)
    if not selected:
        return

    frames = [pd.read_csv(path, dtype=str, keep_default_na=False) for path in selected]
    frame = pd.concat(frames, ignore_index=True)
    st.plotly_chart(loss_figure(frame), use_container_width=True)

    col1, col2 = st.columns(2)
    with col1:
        st.plotly_chart(curvature_figure(frame), use_container_width=True)
    with col2:
        st.plotly_chart(alignment_figure(frame), use_container_width=True)

    st.subheader("🧾 Summaries")
    rows = []
    for path in selected:
        json_path = path.with_suffix(".json")
        if not json_path.is_file():
            continue
        data = json.loads(json_path.read_text(encoding="utf-8"))
        # comparison artifacts hold a list of run summaries
        for summary in data.get("runs", [data]):
            rows.append({key: summary.get(key) for key in (
                "optimizer", "landscape", "status", "initial_loss", "final_loss", "min_loss",
                "total_grad_evals", "dimer_refreshes", "spike_count",
            )})
    if rows:
        st.dataframe(pd.DataFrame(rows), use_container_width=True, hide_index=True)


main()
