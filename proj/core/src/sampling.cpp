#include "wienerlab/sampling.hpp"

#include "wienerlab/errors.hpp"

namespace wienerlab {

std::vector<double> SampleBatch::column(std::size_t j) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, j);
    return out;
}

SampleBatch SampleBatch::from_values(std::vector<double> values, std::size_t width) {
    SampleBatch b;
    b.values = std::move(values);
    b.width = width;
    b.generator = "external";
    return b;
}

CompiledChaos::CompiledChaos(const ChaosElement& f) : dim_(f.dim()), constant_(f.constant()) {
    offsets_.push_back(0);
    for (int k = 1; k <= f.max_order(); ++k) {
        const auto* fk = f.kernel(k);
        if (!fk) continue;
        for (const auto& [alpha, c] : fk->entries()) {
            coefs_.push_back(static_cast<double>(alpha.perm_count()) * c);
            for (const auto& [v, mult] : alpha.runs()) {
                factors_.push_back({v - 1, static_cast<std::uint32_t>(mult)});
            }
            offsets_.push_back(static_cast<std::uint32_t>(factors_.size()));
        }
    }
}

double CompiledChaos::operator()(std::span<const double> x) const {
    double s = constant_;
    for (std::size_t t = 0; t < coefs_.size(); ++t) {
        double prod = coefs_[t];
        for (std::uint32_t j = offsets_[t]; j < offsets_[t + 1]; ++j) {
            const Factor& fac = factors_[j];
            const double xv = x[fac.var];
            // Inline recurrence; degree is at most kMaxOrder.
            double h = xv;
            if (fac.degree != 1) {
                double prev = 1.0;
                for (std::uint32_t d = 1; d < fac.degree; ++d) {
                    const double next = xv * h - static_cast<double>(d) * prev;
                    prev = h;
                    h = next;
                }
            }
            prod *= h;
        }
        s += prod;
    }
    return s;
}

namespace {

SampleBatch sample_compiled(const std::vector<CompiledChaos>& plans, std::size_t dim, std::size_t n,
                            std::uint64_t seed, const InputLaw& law) {
    if (n == 0) throw InvalidArgument("sample: N must be >= 1");
    SampleBatch out;
    out.width = plans.size();
    out.seed = seed;
    out.generator = std::string(kGeneratorTag) + "/" + law.tag();
    out.values.assign(n * plans.size(), 0.0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(dim);
        for (std::size_t i = begin; i < end; ++i) {
            law.draw(seed, i, x);
            for (std::size_t j = 0; j < plans.size(); ++j) out.values[i * plans.size() + j] = plans[j](x);
        }
    });
    return out;
}

}  // namespace

SampleBatch sample(const ChaosElement& f, std::size_t n, std::uint64_t seed, const InputLaw& law) {
    return sample_compiled({CompiledChaos(f)}, f.dim(), n, seed, law);
}

SampleBatch sample(const ChaosVector& v, std::size_t n, std::uint64_t seed, const InputLaw& law) {
    std::vector<CompiledChaos> plans;
    for (const auto& c : v.components()) plans.emplace_back(c);
    return sample_compiled(plans, v.dim(), n, seed, law);
}

}  // namespace wienerlab
