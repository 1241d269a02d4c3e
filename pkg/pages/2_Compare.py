import streamlit as st

from sidebar import init_session_state, show_sidebar
from utils.charts import loss_figure
from utils.config import get_config, load_config
from utils.errors import ConfigError
from utils.runner import compare, frame_to_csv, make_run_config
from utils.validators import OPTIMIZERS


def main():
    load_config()
    init_session_state()
    st.session_state.current_page = "Compare"
    show_sidebar()

    st.title("⚖️ Compare optimizers")
    st.caption("Every member shares the landscape, seeds and step budget from the sidebar")

    chosen = st.multiselect("Optimizers", OPTIMIZERS, default=["adam", "deo-adam"])
    workers = st.number_input("Worker processes", min_value=1, max_value=16, value=get_config("workers", 1))

    if st.button("⚖️ Compare", type="primary"):
        shared = dict(st.session_state.run_values)
        try:
            configs = [make_run_config({**shared, "optimizer": name}) for name in chosen]
            with st.spinner(f"Running {len(configs)} optimizers..."):
                st.session_state.last_compare = compare(configs, int(workers))
        except ConfigError as err:
            st.error(f"❌ {err.field}: {err.message}")
            return

    result = st.session_state.last_compare
    if result is None:
        return
    if result.exit_code != 0:
        st.warning("⚠️ At least one run stopped on a non-finite value")
    st.plotly_chart(loss_figure(result.frame), use_container_width=True)
    st.dataframe(result.table, use_container_width=True, hide_index=True)
    st.download_button("📥 Download merged CSV", frame_to_csv(result.frame), file_name="compare.csv",
                       mime="text/csv")


main()
