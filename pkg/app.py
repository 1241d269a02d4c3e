import logging

import streamlit as st

from sidebar import init_session_state, show_sidebar
from utils.charts import alignment_figure, curvature_figure, loss_figure
from utils.config import get_config, load_config
from utils.errors import ConfigError
from utils.runner import make_run_config, records_frame, result_csv, run, summary_json, write_run

# Configure Streamlit page
st.set_page_config(
    page_title="DEO Benchmark Lab",
    page_icon="🧭",
    layout="wide",
    initial_sidebar_state="expanded",
)


def show_result(result):
    summary = result.summary
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("Final loss", f"{summary.final_loss:.4g}" if summary.final_loss is not None else "—",
                  delta=None if summary.final_loss is None else f"{summary.final_loss - summary.initial_loss:.3g}",
                  delta_color="inverse")
    with col2:
        st.metric("Gradient evaluations", summary.total_grad_evals)
    with col3:
        st.metric("Dimer refreshes", summary.dimer_refreshes)
    with col4:
        st.metric("Loss spikes", summary.spike_count, help="steps whose loss exceeds twice the running minimum")

    if summary.final_accuracy is not None:
        st.caption(f"Training accuracy after the run: {summary.final_accuracy:.1%}")

    if summary.status != "ok":
        st.error(f"❌ Non-finite value at step {summary.failing_step}; rows up to the failure are shown")

    frame = records_frame(result.records, result.config.display_name)
    st.plotly_chart(loss_figure(frame), use_container_width=True)
    if result.config.is_deo:
        col1, col2 = st.columns(2)
        with col1:
            st.plotly_chart(curvature_figure(frame), use_container_width=True)
        with col2:
            if result.config.oracle:
                st.plotly_chart(alignment_figure(frame), use_container_width=True)
            elif summary.mean_refresh_angle_deg is not None:
                st.metric("Mean turn per refresh (°)", f"{summary.mean_refresh_angle_deg:.2f}")
                st.metric("Max turn per refresh (°)", f"{summary.max_refresh_angle_deg:.2f}")

    with st.expander("Telemetry"):
        st.dataframe(frame, use_container_width=True, hide_index=True)

    col1, col2 = st.columns(2)
    with col1:
        st.download_button("📥 Download CSV", result_csv(result), file_name=f"{result.config.run_id}.csv",
                           mime="text/csv")
    with col2:
        st.download_button("📥 Download summary", summary_json(summary), file_name=f"{result.config.run_id}.json",
                           mime="application/json")


# Initialize app
def main():
    load_config()
    logging.basicConfig(level=get_config("log_level", "INFO"))
    init_session_state()
    st.session_state.current_page = "Run"
    show_sidebar()

    st.title("🧭 DEO Benchmark Lab")
    st.caption("Seeded runs of SGD / Adam / AdamW with and without dimer-based gradient projection")

    if st.button("▶️ Run", type="primary"):
        try:
            cfg = make_run_config(st.session_state.run_values)
        except ConfigError as err:
            st.error(f"❌ {err.field}: {err.message}")
            return
        with st.spinner(f"Running {cfg.optimizer} on {cfg.landscape}..."):
            result = run(cfg)
        st.session_state.last_result = result
        csv_path, _ = write_run(result)
        st.success(f"✅ Saved to {csv_path}")

    if st.session_state.last_result is not None:
        show_result(st.session_state.last_result)
    else:
        st.info("Configure a run in the sidebar and press Run")


if __name__ == "__main__":
    main()
