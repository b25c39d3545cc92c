#include <string>

#include "csqe/error.hpp"
#include "csqe/expansion.hpp"

namespace csqe {
namespace {

constexpr std::string_view kKeqeTemplatePrefix = "Please write a passage to answer the question\n\nQuestion: ";
constexpr std::string_view kKeqeTemplateSuffix = "\n\nPassage:";

// The one-shot demonstration is built from a TREC DL19 query. The passages
// are kept byte-for-byte, including the mis-encoded ellipsis in passage 3.
constexpr std::string_view kExampleQuery = "how are some sharks warm blooded";

const std::vector<std::string> kExampleDocs = {
    R"csqe(Most sharks are cold-blooded. Some, like the Mako and the Great white shark, are partially warmblooded (they are endotherms). Cold blooded although if you've ever seen a Great White Shark hunt sea lions you'd be thinking they would have to be hotblooded. Actually the Salmon Shark is a warm blooded shark.)csqe",
    R"csqe(Are sharks cold-blooded or warm-blooded? Sharks have a reputation as cold-blooded and despite how negative that term is, it is not entirely inaccurate. Sharks are by no means evil, vicious killers like that quote suggests. Nonetheless, sharks are, for the most part anyways, efficient ectothermic predators. Endo vs Ecto.)csqe",
    R"csqe(Great white sharks are some of the only warm blooded sharks. This allows them to swim in colder waters in addition to warm, tropical waters. Great White sharks can be found asâ¦ north as Alaska and as south as the southern tip of South America. They exist worldwide, everywhere in-between. 5 people found this useful.)csqe",
    R"csqe(Sharks' blood gives them turbo speed. Several species of shark and tuna have something special going on inside their bodies. For a long time, scientists have known that some fish species appear warm-blooded. Salmon sharks can elevate their body temperatures by up to 20 degrees compared to the surrounding water, for example.)csqe",
};

constexpr std::string_view kInstruction =
    "You will begin by examining the initially retrieved documents and identifying the ones that are relevant, even partially, to the query. Once the relevant documents are identified, you will extract the key sentences from each document that contribute to their relevance.";

constexpr std::string_view kExampleAnswer = R"csqe(Based on the query "how are some sharks warm blooded", I have examined the initially retrieved documents. Here are the relevant documents and the key sentences extracted from each: 

Document 1:
"Most sharks are cold-blooded. Some, like the Mako and the Great white shark, are partially warm-blooded (they are endotherms)."

"Actually, the Salmon Shark is a warm-blooded shark."

Document 3:
"Great white sharks are some of the only warm-blooded sharks."

"This allows them to swim in colder waters in addition to warm, tropical waters."

Document 4:
"Salmon sharks can elevate their body temperatures by up to 20 degrees compared to the surrounding water, for example.")csqe";

void append_query_block(std::string& out, std::string_view query, const std::vector<std::string>& docs) {
    out += "Query: \"";
    out += query;
    out += "\"\n\nRetrieved documents:\n\n";
    for (std::size_t i = 0; i < docs.size(); ++i) {
        out += std::to_string(i + 1);
        out += ". ";
        out += docs[i];
        out += "\n\n";
    }
    out += kInstruction;
}

}  // namespace

std::string build_keqe_prompt(std::string_view query) {
    if (query.empty()) throw ConfigError("KEQE prompt needs a non-empty query");
    std::string out;
    out.reserve(kKeqeTemplatePrefix.size() + query.size() + kKeqeTemplateSuffix.size());
    out += kKeqeTemplatePrefix;
    out += query;
    out += kKeqeTemplateSuffix;
    return out;
}

std::string build_csqe_prompt(std::string_view query, const std::vector<std::string>& docs) {
    if (query.empty()) throw ConfigError("CSQE prompt needs a non-empty query");
    if (docs.empty()) throw ConfigError("CSQE prompt needs at least one retrieved document");
    std::string out;
    append_query_block(out, kExampleQuery, kExampleDocs);
    out += "\n\n";
    out += kExampleAnswer;
    out += "\n\n";
    append_query_block(out, query, docs);
    return out;
}

std::string_view csqe_example_answer() { return kExampleAnswer; }

const std::vector<std::string>& csqe_example_documents() { return kExampleDocs; }

}  // namespace csqe
