#include "kgmem/types.hpp"

#include "kgmem/error.hpp"
#include "kgmem/tokens.hpp"

namespace kgmem {

const char* to_string(Role role) { return role == Role::User ? "user" : "assistant"; }

Role role_from_string(std::string_view text) {
    if (text == "user") return Role::User;
    if (text == "assistant") return Role::Assistant;
    throw ValidationError("unknown role '" + std::string(text) + "'");
}

std::optional<Triplet> make_triplet(std::string_view subject, std::string_view predicate, std::string_view object) {
    Triplet t{trim(subject), trim(predicate), trim(object)};
    for (const auto* f : {&t.subject, &t.predicate, &t.object}) {
        if (f->empty() || f->find(kTripletSeparator) != std::string::npos || f->find('\n') != std::string::npos) {
            return std::nullopt;
        }
    }
    return t;
}

}  // namespace kgmem
