#include "cornet/model_io.hpp"

#include <fstream>
#include <memory>

namespace cornet {

namespace {

void write_vec(std::ostream& os, const char* tag, const Vec& v) {
    os << tag << ' ' << v.size();
    for (double x : v) os << ' ' << x;
    os << '\n';
}

Vec read_vec(std::istream& is, const std::string& want) {
    std::string tag;
    std::size_t n = 0;
    is >> tag >> n;
    if (tag != want) throw parse_error("model file: expected '" + want + "', got '" + tag + "'");
    Vec v(n);
    for (double& x : v) is >> x;
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw parse_error("cannot open '" + path + "' for writing");
    os.precision(17);
    return os;
}

TwoHeadModel read_two_head(std::istream& is) {
    TwoHeadModel m;
    int aug = 0;
    is >> aug;
    m.augment_input = aug != 0;
    m.phi = load_stack(is);
    m.heads[1] = read_vec(is, "head1");
    m.heads[0] = read_vec(is, "head0");
    return m;
}

void write_two_head_body(std::ostream& os, const TwoHeadModel& m) {
    os << (m.augment_input ? 1 : 0) << '\n';
    save_stack(os, m.phi);
    write_vec(os, "head1", m.heads[1]);
    write_vec(os, "head0", m.heads[0]);
}

}  // namespace

void save_model(const CornetModel& m, const std::string& path) {
    auto os = open_out(path);
    os << "cornetv1\n" << (m.augment_input ? 1 : 0) << '\n';
    os << m.lambda_d << ' ' << m.lambda_delta << '\n';
    save_stack(os, m.phi);
    write_vec(os, "wc1", m.w_c[1]);
    write_vec(os, "wc0", m.w_c[0]);
    write_vec(os, "delta1", m.delta[1]);
    write_vec(os, "delta0", m.delta[0]);
}

void save_model(const TwoHeadModel& m, const std::string& path) {
    auto os = open_out(path);
    os << "twoheadv1\n";
    write_two_head_body(os, m);
}

void save_model(const KallusModel& m, const std::string& path) {
    auto os = open_out(path);
    os << "kallusv1\n";
    os << (m.base == KallusBase::nn ? "nn" : "ridge") << ' '
       << (m.target == KallusTarget::outcome ? "outcome" : "cate") << '\n';
    if (m.base == KallusBase::nn) {
        write_two_head_body(os, m.nn);
    } else {
        write_vec(os, "ridge1", m.ridge_coef[1]);
        write_vec(os, "ridge0", m.ridge_coef[0]);
    }
    if (m.target == KallusTarget::cate) {
        write_vec(os, "theta", m.theta);
    } else {
        write_vec(os, "theta1", m.theta_arm[1]);
        write_vec(os, "theta0", m.theta_arm[0]);
    }
}

void save_avg_model(const TwoHeadModel& m_unc, const TwoHeadModel& m_conf, double lam, const std::string& path) {
    auto os = open_out(path);
    os << "avgv1\n" << lam << '\n';
    write_two_head_body(os, m_unc);
    write_two_head_body(os, m_conf);
}

LoadedModel load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw parse_error("cannot open '" + path + "'");
    std::string magic;
    is >> magic;
    LoadedModel out;
    if (magic == "cornetv1") {
        auto m = std::make_shared<CornetModel>();
        int aug = 0;
        is >> aug;
        m->augment_input = aug != 0;
        is >> m->lambda_d >> m->lambda_delta;
        m->phi = load_stack(is);
        m->w_c[1] = read_vec(is, "wc1");
        m->w_c[0] = read_vec(is, "wc0");
        m->delta[1] = read_vec(is, "delta1");
        m->delta[0] = read_vec(is, "delta0");
        out.kind = "cornet";
        out.input_dim = m->phi.input_dim() - (m->augment_input ? 1 : 0);
        out.cate = [m](std::span<const double> x) { return m->predict(x); };
    } else if (magic == "twoheadv1") {
        auto m = std::make_shared<TwoHeadModel>(read_two_head(is));
        out.kind = "two_head";
        out.input_dim = m->phi.input_dim() - (m->augment_input ? 1 : 0);
        out.cate = [m](std::span<const double> x) { return m->predict_cate(x); };
    } else if (magic == "avgv1") {
        double lam = 0.0;
        is >> lam;
        auto mu = std::make_shared<TwoHeadModel>(read_two_head(is));
        auto mc = std::make_shared<TwoHeadModel>(read_two_head(is));
        out.kind = "tau_avg";
        out.input_dim = mu->phi.input_dim() - (mu->augment_input ? 1 : 0);
        out.cate = [mu, mc, lam](std::span<const double> x) {
            return (1.0 - lam) * mu->predict_cate(x) + lam * mc->predict_cate(x);
        };
    } else if (magic == "kallusv1") {
        auto m = std::make_shared<KallusModel>();
        std::string base, target;
        is >> base >> target;
        m->base = base == "nn" ? KallusBase::nn : KallusBase::ridge;
        m->target = target == "outcome" ? KallusTarget::outcome : KallusTarget::cate;
        if (m->base == KallusBase::nn) {
            m->nn = read_two_head(is);
            out.input_dim = m->nn.phi.input_dim() - (m->nn.augment_input ? 1 : 0);
        } else {
            m->ridge_coef[1] = read_vec(is, "ridge1");
            m->ridge_coef[0] = read_vec(is, "ridge0");
            out.input_dim = m->ridge_coef[1].size() - 1;
        }
        if (m->target == KallusTarget::cate) {
            m->theta = read_vec(is, "theta");
        } else {
            m->theta_arm[1] = read_vec(is, "theta1");
            m->theta_arm[0] = read_vec(is, "theta0");
        }
        out.kind = "kallus";
        out.cate = [m](std::span<const double> x) { return m->predict(x); };
    } else {
        throw parse_error("unknown model header '" + magic + "' in " + path);
    }
    if (!is) throw parse_error("truncated model file " + path);
    return out;
}

}  // namespace cornet
