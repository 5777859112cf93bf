#include "cornet/net.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace cornet {

void LayerStack::validate() const {
    if (layer_dims.size() < 2) throw shape_error("LayerStack needs at least input and output dims");
    if (weights.size() != layer_dims.size() - 1)
        throw shape_error("LayerStack has " + std::to_string(weights.size()) + " weight matrices for " +
                          std::to_string(layer_dims.size()) + " dims");
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k].cols != layer_dims[k] || weights[k].rows != layer_dims[k + 1])
            throw shape_error("layer " + std::to_string(k) + " weights are " + std::to_string(weights[k].rows) +
                              "x" + std::to_string(weights[k].cols));
        if (!weights[k].all_finite()) throw numeric_error("non-finite weight in layer " + std::to_string(k));
    }
}

double LayerStack::max_weight_norm_1inf() const {
    double m = 0.0;
    for (const auto& w : weights) m = std::max(m, norm_1inf(w));
    return m;
}

GradientSet GradientSet::zeros_like(const LayerStack& stack) {
    GradientSet gs;
    gs.g.reserve(stack.weights.size());
    for (const auto& w : stack.weights) gs.g.emplace_back(w.rows, w.cols);
    return gs;
}

void GradientSet::add_scaled(const GradientSet& other, double scale) {
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t i = 0; i < g[k].a.size(); ++i) g[k].a[i] += scale * other.g[k].a[i];
}

bool GradientSet::all_finite() const {
    for (const auto& m : g)
        if (!m.all_finite()) return false;
    return true;
}

OptimizerState OptimizerState::init(const LayerStack& stack, double lr, double b1, double b2, double eps) {
    OptimizerState st;
    st.learning_rate = lr;
    st.beta1 = b1;
    st.beta2 = b2;
    st.epsilon = eps;
    for (const auto& w : stack.weights) {
        st.first_moment.emplace_back(w.rows, w.cols);
        st.second_moment.emplace_back(w.rows, w.cols);
    }
    return st;
}

LayerStack make_stack(const std::vector<std::size_t>& dims, Activation out_act, Rng& rng) {
    if (dims.size() < 2) throw shape_error("make_stack: need at least 2 dims");
    LayerStack s;
    s.layer_dims = dims;
    s.output_activation = out_act;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        Matrix w(dims[k + 1], dims[k]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[k]));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (double& v : w.a) v = u(rng);
        s.weights.push_back(std::move(w));
    }
    return s;
}

static inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Vec forward(const LayerStack& stack, std::span<const double> x) {
    if (x.size() != stack.input_dim())
        throw shape_error("forward: input has " + std::to_string(x.size()) + " entries, stack expects " +
                          std::to_string(stack.input_dim()));
    Vec cur(x.begin(), x.end());
    const std::size_t K = stack.depth();
    for (std::size_t k = 0; k < K; ++k) {
        const Matrix& w = stack.weights[k];
        Vec next(w.rows, 0.0);
        for (std::size_t i = 0; i < w.rows; ++i) next[i] = dot(w.row(i), cur);
        if (k + 1 < K) {
            for (double& v : next) v = std::tanh(v);
        } else if (stack.output_activation == Activation::sigmoid) {
            for (double& v : next) v = sigmoid(v);
        }
        cur = std::move(next);
    }
    return cur;
}

Vec reverse_gradient(std::span<const double> upstream, double scale) {
    if (scale < 0.0) throw numeric_error("reverse_gradient: scale must be nonnegative");
    Vec out(upstream.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -scale * upstream[i];
    return out;
}

ForwardCache forward_batch(const LayerStack& stack, const Matrix& x) {
    if (x.cols != stack.input_dim())
        throw shape_error("forward_batch: input cols " + std::to_string(x.cols) + " vs " +
                          std::to_string(stack.input_dim()));
    ForwardCache c;
    const std::size_t K = stack.depth();
    c.acts.resize(K);  // acts[0..K-1]; hidden post-activations live at 1..K-1
    c.acts[0] = x;
    Matrix z;
    for (std::size_t k = 0; k < K; ++k) {
        gemm_nt(c.acts[k], stack.weights[k], z);
        if (k + 1 < K) {
            for (double& v : z.a) v = std::tanh(v);
            c.acts[k + 1] = z;
        } else {
            c.preact = std::move(z);
        }
    }
    return c;
}

Matrix cache_outputs(const LayerStack& stack, const ForwardCache& cache) {
    Matrix out = cache.preact;
    if (stack.output_activation == Activation::sigmoid)
        for (double& v : out.a) v = sigmoid(v);
    return out;
}

GradientSet backward_batch(const LayerStack& stack, const ForwardCache& cache, const Matrix& d_preact,
                           Matrix* dx) {
    const std::size_t K = stack.depth();
    if (!d_preact.same_shape(cache.preact)) throw shape_error("backward_batch: d_preact shape mismatch");
    GradientSet gs = GradientSet::zeros_like(stack);
    Matrix dz = d_preact;
    for (std::size_t k = K; k-- > 0;) {
        gemm_tn(dz, cache.acts[k], gs.g[k]);  // dW_k = dz^T . a_{k-1}
        if (k == 0) {
            if (dx != nullptr) gemm_nn(dz, stack.weights[0], *dx);
            break;
        }
        Matrix da;
        gemm_nn(dz, stack.weights[k], da);  // da_{k-1} = dz . W_k
        const Matrix& a = cache.acts[k];
        for (std::size_t i = 0; i < da.a.size(); ++i) da.a[i] *= 1.0 - a.a[i] * a.a[i];
        dz = std::move(da);
    }
    return gs;
}

GradientSet backward(const LayerStack& stack, std::span<const double> x, std::span<const double> upstream) {
    if (upstream.size() != stack.output_dim())
        throw shape_error("backward: upstream has " + std::to_string(upstream.size()) + " entries, output dim is " +
                          std::to_string(stack.output_dim()));
    Matrix xb(1, x.size());
    std::copy(x.begin(), x.end(), xb.a.begin());
    ForwardCache cache = forward_batch(stack, xb);
    Matrix dp(1, upstream.size());
    if (stack.output_activation == Activation::sigmoid) {
        for (std::size_t j = 0; j < upstream.size(); ++j) {
            const double p = sigmoid(cache.preact(0, j));
            dp(0, j) = upstream[j] * p * (1.0 - p);
        }
    } else {
        std::copy(upstream.begin(), upstream.end(), dp.a.begin());
    }
    return backward_batch(stack, cache, dp);
}

void adam_update_block(std::vector<double>& w, const std::vector<double>& g, std::vector<double>& m,
                       std::vector<double>& v, long step_count, double lr, double beta1, double beta2,
                       double eps) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mh = m[i] / bc1;
        const double vh = v[i] / bc2;
        w[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

void adam_step(OptimizerState& state, const GradientSet& grads, LayerStack& stack) {
    if (grads.g.size() != stack.weights.size()) throw shape_error("adam_step: gradient set layer count mismatch");
    for (std::size_t k = 0; k < grads.g.size(); ++k)
        if (!grads.g[k].same_shape(stack.weights[k])) throw shape_error("adam_step: gradient shape mismatch");
    if (!grads.all_finite()) throw numeric_error("adam_step: non-finite gradient entries");
    state.step_count += 1;
    for (std::size_t k = 0; k < stack.weights.size(); ++k)
        adam_update_block(stack.weights[k].a, grads.g[k].a, state.first_moment[k].a, state.second_moment[k].a,
                          state.step_count, state.learning_rate, state.beta1, state.beta2, state.epsilon);
}

// Text format: versioned header, dims, activation tag, then row-major
// matrices at full double precision.
void save_stack(std::ostream& os, const LayerStack& stack) {
    os.precision(17);
    os << "netv1\n";
    os << "dims " << stack.layer_dims.size();
    for (auto d : stack.layer_dims) os << ' ' << d;
    os << '\n';
    os << "out " << (stack.output_activation == Activation::sigmoid ? "sigmoid" : "identity") << '\n';
    for (const auto& w : stack.weights) {
        os << "layer " << w.rows << ' ' << w.cols << '\n';
        for (std::size_t i = 0; i < w.rows; ++i) {
            for (std::size_t j = 0; j < w.cols; ++j) os << (j ? " " : "") << w(i, j);
            os << '\n';
        }
    }
}

LayerStack load_stack(std::istream& is) {
    std::string tag;
    is >> tag;
    if (tag != "netv1") throw parse_error("expected netv1 header, got '" + tag + "'");
    LayerStack s;
    std::size_t ndims = 0;
    is >> tag >> ndims;
    if (tag != "dims" || ndims < 2) throw parse_error("bad dims line in net file");
    s.layer_dims.resize(ndims);
    for (auto& d : s.layer_dims) is >> d;
    is >> tag;
    if (tag != "out") throw parse_error("missing output activation tag");
    is >> tag;
    if (tag == "sigmoid")
        s.output_activation = Activation::sigmoid;
    else if (tag == "identity")
        s.output_activation = Activation::identity;
    else
        throw parse_error("unknown output activation '" + tag + "'");
    for (std::size_t k = 0; k + 1 < ndims; ++k) {
        std::size_t r = 0, c = 0;
        is >> tag >> r >> c;
        if (tag != "layer") throw parse_error("missing layer header at layer " + std::to_string(k));
        Matrix w(r, c);
        for (double& v : w.a) is >> v;
        s.weights.push_back(std::move(w));
    }
    if (!is) throw parse_error("truncated net file");
    s.validate();
    return s;
}

}  // namespace cornet
