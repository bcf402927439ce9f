#include "bam/ledger.hpp"

#include <numeric>

namespace bam {

void validate_classes(const std::vector<ResourceClassConfig> &classes) {
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const auto &c = classes[k];
        const auto label = "class " + std::to_string(k);
        if (c.class_index != k)
            throw ConfigError(label + ": classes must be declared as 0..n-1 in order");
        if (c.constraint < 0 || c.private_units < 0)
            throw ConfigError(label + ": negative constraint or private partition");
        if (c.private_units > c.constraint)
            throw ConfigError(label + ": private partition exceeds constraint");
        if (k > 0 && c.priority_rank <= classes[k - 1].priority_rank)
            throw ConfigError(label + ": priority ranks must strictly increase with class index");
    }
}

std::vector<Units> constraints_of(const std::vector<ResourceClassConfig> &classes) {
    std::vector<Units> out;
    out.reserve(classes.size());
    for (const auto &c : classes)
        out.push_back(c.constraint);
    return out;
}

Units Grant::units_from(ClassIndex donor) const {
    Units sum = 0;
    for (const auto &d : breakdown)
        if (d.donor == donor)
            sum += d.total();
    return sum;
}

Units Grant::total() const {
    Units sum = 0;
    for (const auto &d : breakdown)
        sum += d.total();
    return sum;
}

AllocationLedger::AllocationLedger(std::vector<ResourceClassConfig> classes, Units capacity)
    : classes_(std::move(classes)), capacity_(capacity) {
    validate_classes(classes_);
    const auto sum = std::accumulate(classes_.begin(), classes_.end(), Units{0},
                                     [](Units acc, const ResourceClassConfig &c) { return acc + c.constraint; });
    if (sum > capacity_)
        throw ConfigError("class constraints total " + std::to_string(sum) + " exceed capacity " +
                          std::to_string(capacity_));
    const auto n = classes_.size();
    private_used_.assign(n, 0);
    public_used_.assign(n, std::vector<Units>(n, 0));
}

Units AllocationLedger::borrowed(ClassIndex borrower, ClassIndex donor) const {
    if (borrower == donor)
        return 0;
    return public_used_.at(borrower).at(donor);
}

Units AllocationLedger::lent_out(ClassIndex donor) const {
    Units sum = 0;
    for (ClassIndex k = 0; k < class_count(); ++k)
        sum += borrowed(k, donor);
    return sum;
}

Units AllocationLedger::attributed_used(ClassIndex z) const {
    Units sum = private_used_.at(z);
    for (ClassIndex k = 0; k < class_count(); ++k)
        sum += public_used_[k][z];
    return sum;
}

Units AllocationLedger::free_private(ClassIndex z) const {
    return classes_.at(z).private_units - private_used_.at(z);
}

Units AllocationLedger::free_public(ClassIndex z) const {
    Units held = 0;
    for (ClassIndex k = 0; k < class_count(); ++k)
        held += public_used_[k][z];
    return classes_.at(z).public_units() - held;
}

Units AllocationLedger::total_used() const {
    Units sum = 0;
    for (ClassIndex z = 0; z < class_count(); ++z)
        sum += attributed_used(z);
    return sum;
}

const Grant *AllocationLedger::find(const std::string &request_id) const {
    auto it = grants_.find(request_id);
    return it == grants_.end() ? nullptr : &it->second;
}

void AllocationLedger::commit(Grant grant) {
    if (grants_.count(grant.request_id))
        throw Error("request '" + grant.request_id + "' already holds a grant");
    const auto k = grant.class_index;
    if (k >= class_count())
        throw Error("grant for unknown class " + std::to_string(k));

    // Validate against a scratch copy of the touched entries first.
    auto priv = private_used_;
    auto pub = public_used_;
    for (const auto &d : grant.breakdown) {
        if (d.donor >= class_count() || d.private_units < 0 || d.public_units < 0)
            throw Error("malformed draw in grant '" + grant.request_id + "'");
        if (d.private_units > 0 && d.donor != k)
            throw Error("grant '" + grant.request_id + "' draws another class's private units");
        priv[k] += d.private_units;
        pub[k][d.donor] += d.public_units;
    }
    for (ClassIndex z = 0; z < class_count(); ++z) {
        Units pub_held = 0;
        for (ClassIndex b = 0; b < class_count(); ++b)
            pub_held += pub[b][z];
        if (priv[z] > classes_[z].private_units || pub_held > classes_[z].public_units())
            throw Error("grant '" + grant.request_id + "' overdraws class " + std::to_string(z));
    }
    private_used_ = std::move(priv);
    public_used_ = std::move(pub);
    grant.sequence = next_seq_++;
    grants_.emplace(grant.request_id, std::move(grant));
}

Grant AllocationLedger::remove(const std::string &request_id) {
    auto it = grants_.find(request_id);
    if (it == grants_.end())
        throw UnknownRequest(request_id);
    Grant g = std::move(it->second);
    grants_.erase(it);
    for (const auto &d : g.breakdown) {
        private_used_[g.class_index] -= d.private_units;
        public_used_[g.class_index][d.donor] -= d.public_units;
    }
    return g;
}

void AllocationLedger::reconfigure(std::vector<ResourceClassConfig> classes) {
    validate_classes(classes);
    if (classes.size() != class_count())
        throw ConfigError("reconfiguration must keep the number of classes");
    Units sum = 0;
    for (const auto &c : classes)
        sum += c.constraint;
    if (sum > capacity_)
        throw ConfigError("reconfigured constraints exceed capacity");
    for (ClassIndex z = 0; z < class_count(); ++z) {
        Units pub_held = 0;
        for (ClassIndex b = 0; b < class_count(); ++b)
            pub_held += public_used_[b][z];
        if (private_used_[z] > classes[z].private_units || pub_held > classes[z].public_units())
            throw ConfigError("reconfiguration of class " + std::to_string(z) + " would revoke granted units");
    }
    classes_ = std::move(classes);
}

std::optional<std::string> AllocationLedger::check_invariants() const {
    const auto n = class_count();
    std::vector<Units> priv(n, 0);
    std::vector<std::vector<Units>> pub(n, std::vector<Units>(n, 0));
    for (const auto &[id, g] : grants_) {
        if (g.total() != g.demand)
            return "grant '" + id + "' breakdown does not sum to its demand";
        for (const auto &d : g.breakdown) {
            if (d.private_units > 0 && d.donor != g.class_index)
                return "grant '" + id + "' holds foreign private units";
            priv[g.class_index] += d.private_units;
            pub[g.class_index][d.donor] += d.public_units;
        }
    }
    if (priv != private_used_ || pub != public_used_)
        return "usage matrices differ from the fold of active grants";
    Units total = 0;
    for (ClassIndex z = 0; z < n; ++z) {
        if (free_private(z) < 0 || free_public(z) < 0)
            return "class " + std::to_string(z) + " partition overdrawn";
        const auto used = attributed_used(z);
        if (used > classes_[z].constraint)
            return "class " + std::to_string(z) + " attributed usage exceeds its constraint";
        total += used;
    }
    if (total > capacity_)
        return "total attributed usage exceeds link capacity";
    return std::nullopt;
}

bool AllocationLedger::operator==(const AllocationLedger &other) const {
    if (classes_ != other.classes_ || capacity_ != other.capacity_ || private_used_ != other.private_used_ ||
        public_used_ != other.public_used_ || grants_.size() != other.grants_.size())
        return false;
    for (const auto &[id, g] : grants_) {
        const auto *o = other.find(id);
        if (!o || o->class_index != g.class_index || o->demand != g.demand || o->breakdown != g.breakdown)
            return false;
    }
    return true;
}

} // namespace bam
