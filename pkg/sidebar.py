import streamlit as st

from utils.config import get_config
from utils.dimer import SignConvention
from utils.validators import OPTIMIZERS

LANDSCAPE_LABELS = {
    "quadratic": "Quadratic",
    "monkey": "Monkey saddle",
    "rosenbrock": "Rosenbrock",
    "mlp": "MLP on two moons",
}


def init_session_state():
    """Initialize session state variables"""
    defaults = {
        "current_page": "Run",
        "run_values": {},
        "last_result": None,
        "last_compare": None,
    }

    for key, value in defaults.items():
        if key not in st.session_state:
            st.session_state[key] = value


def run_form() -> dict:
    """Widgets for the fields a user typically varies; returns RunConfig values"""
    st.markdown("### ⚙️ Run configuration")
    landscape = st.selectbox("Landscape", list(LANDSCAPE_LABELS), format_func=LANDSCAPE_LABELS.get)
    values = {
        "landscape": landscape,
        "optimizer": st.selectbox("Optimizer", OPTIMIZERS, index=OPTIMIZERS.index("deo-adam")),
        "steps": st.number_input("Steps", min_value=1, max_value=20000, value=500, step=100),
        "lr_max": st.number_input("Peak learning rate", min_value=0.0, value=1e-2, format="%.1e"),
    }
    seed = st.number_input("Seed", min_value=0, value=42, step=1)
    values.update(data_seed=seed, init_seed=seed, dimer_seed=seed)

    if landscape == "quadratic":
        values["lambdas"] = st.text_input("Eigenvalues", value="1,-1", help="comma separated")
    elif landscape == "rosenbrock":
        values["dim"] = st.number_input("Dimension", min_value=2, max_value=500, value=2)
        values["start"] = st.radio("Start", ["random", "classic"], horizontal=True)
    elif landscape == "mlp":
        values["batch_size"] = st.number_input("Batch size", min_value=1, max_value=200, value=32)

    with st.expander("Dimer settings", expanded=values["optimizer"].startswith("deo-")):
        never = st.checkbox("Never refresh (f = ∞)", value=False)
        values["frequency"] = "inf" if never else st.number_input("Refresh period f", min_value=1, value=10)
        values["alpha"] = st.number_input("Projection strength α", min_value=0.0, value=5.0)
        values["delta_r"] = st.number_input("Dimer displacement ΔR", min_value=1e-8, value=6e-3, format="%.1e")
        values["eta_rot"] = st.number_input("Rotation rate", min_value=1e-8, value=1e-3, format="%.1e")
        values["sign"] = st.selectbox("Force sign", [s.value for s in SignConvention])
        values["oracle"] = st.checkbox("Compare with Hessian eigenvectors on refresh", value=False)
    return values


def show_sidebar():
    with st.sidebar:
        st.markdown(f"## 🧭 {get_config('app_name', 'DEO Benchmark Lab')}")

        pages = [
            {"name": "Run", "icon": "▶️", "desc": "Single seeded run", "path": "app.py"},
            {"name": "Dashboard", "icon": "📊", "desc": "Browse saved runs", "path": "pages/1_Dashboard.py"},
            {"name": "Compare", "icon": "⚖️", "desc": "Optimizers side by side", "path": "pages/2_Compare.py"},
            {"name": "Oracle", "icon": "🔬", "desc": "Hessian spectrum and rotation", "path": "pages/3_Oracle.py"},
        ]

        for page in pages:
            if st.button(
                f"{page['icon']} {page['name']}",
                help=page["desc"],
                use_container_width=True,
                type="primary" if st.session_state.get("current_page") == page["name"] else "secondary",
            ):
                st.session_state.current_page = page["name"]
                st.switch_page(page["path"])

        st.divider()
        st.session_state.run_values = run_form()

        st.divider()
        st.markdown(f"""
        <div style="margin-top: 1rem; padding: 1rem; background: #f0f2f6; border-radius: 0.5rem;">
            <small>
                <strong>Version:</strong> {get_config('version', '')}<br>
                <strong>Output dir:</strong> {get_config('out_dir', 'runs')}
            </small>
        </div>
        """, unsafe_allow_html=True)
