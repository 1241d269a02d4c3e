import pandas as pd
import streamlit as st

from sidebar import init_session_state, show_sidebar
from utils.charts import alignment_figure, spectrum_figure
from utils.dimer import init_dimer_state, rotate_once
from utils.errors import ConfigError, DeoError
from utils.numeric import RngSeed
from utils.config import load_config
from utils.oracle import alignment, oracle_eigenpairs
from utils.runner import build_problem, initial_theta, make_run_config


def rotation_trace(problem, theta, cfg, rotations: int, v_min):
    """Alignment with v_min after each of `rotations` dimer rotations at a fixed point"""
    batch = 1 if cfg.landscape == "mlp" else None
    state = init_dimer_state(problem.dim, cfg.deo_config().dimer, RngSeed(cfg.dimer_seed, "dimer"))
    g = problem.grad(theta, batch)
    rows = [{"step": 0, "optimizer": cfg.sign.value, "align_vmin": alignment(state.direction, v_min)}]
    for k in range(1, rotations + 1):
        state, diag = rotate_once(problem, theta, g, state, batch)
        rows.append({"step": k, "optimizer": cfg.sign.value, "align_vmin": alignment(state.direction, v_min),
                     "curv_grad": diag.curvature_grad})
    return pd.DataFrame(rows), state.direction


def main():
    load_config()
    init_session_state()
    st.session_state.current_page = "Oracle"
    show_sidebar()

    st.title("🔬 Hessian oracle")
    st.caption("Exact or finite-difference Hessian at the initial point, and how the dimer axis turns toward it")

    try:
        cfg = make_run_config(st.session_state.run_values)
    except ConfigError as err:
        st.error(f"❌ {err.field}: {err.message}")
        return

    problem = build_problem(cfg)
    theta = initial_theta(cfg, problem)
    rotations = st.slider("Rotations", min_value=1, max_value=2000, value=200)

    try:
        with st.spinner("Eigendecomposing the Hessian..."):
            pairs = oracle_eigenpairs(problem, theta, 1 if cfg.landscape == "mlp" else None)
        trace, direction = rotation_trace(problem, theta, cfg, rotations, pairs.v_min)
    except DeoError as err:
        st.error(f"❌ {err}")
        return

    col1, col2 = st.columns(2)
    with col1:
        st.plotly_chart(spectrum_figure(pairs.eigenvalues), use_container_width=True)
        st.metric("Smallest eigenvalue", f"{pairs.eigenvalues[0]:.4g}")
        st.metric("Largest eigenvalue", f"{pairs.eigenvalues[-1]:.4g}")
        if pairs.min_is_degenerate():
            st.warning("⚠️ The two smallest eigenvalues coincide; alignment is not meaningful")
    with col2:
        st.plotly_chart(alignment_figure(trace), use_container_width=True)
        st.metric("Final alignment with v_min", f"{trace['align_vmin'].iloc[-1]:.4f}")
        st.metric("Final alignment with v_max", f"{alignment(direction, pairs.v_max):.4f}")


main()
