#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "atelier/common.hpp"

namespace atelier {

// Replaces {name} placeholders. Unknown placeholders are left intact so a
// template edit that adds a literal brace pair does not explode.
inline std::string render_template(std::string_view tpl,
                                   const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        const std::size_t open = tpl.find('{', pos);
        if (open == std::string_view::npos) {
            out += tpl.substr(pos);
            break;
        }
        out += tpl.substr(pos, open - pos);
        const std::size_t close = tpl.find('}', open);
        if (close == std::string_view::npos) {
            out += tpl.substr(open);
            break;
        }
        const std::string key(tpl.substr(open + 1, close - open - 1));
        auto it = values.find(key);
        if (it != values.end()) {
            out += it->second;
        } else {
            out += tpl.substr(open, close - open + 1);
        }
        pos = close + 1;
    }
    return out;
}

// Named prompt templates with compiled-in defaults; a templates directory of
// <id>.txt files overrides them per id.
class PromptLibrary {
public:
    PromptLibrary() : templates_(defaults()) {}

    explicit PromptLibrary(const std::string& templates_dir) : templates_(defaults()) {
        load_dir(templates_dir);
    }

    void load_dir(const std::string& dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) throw Error("templates directory not found: " + dir);
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".txt")
                templates_[entry.path().stem().string()] = rtrim(read_file(entry.path().string()));
    }

    const std::string& get(const std::string& id) const {
        auto it = templates_.find(id);
        if (it == templates_.end()) throw Error("unknown prompt template: " + id);
        return it->second;
    }

    std::string render(const std::string& id,
                       const std::map<std::string, std::string>& values) const {
        return render_template(get(id), values);
    }

    static std::map<std::string, std::string> defaults() {
        std::map<std::string, std::string> t;
        t["keyword_extract"] =
            "You are an agent specialized in extracting text features. Your expertise lies in "
            "extracting and returning text features. No matter what text the user provides, you "
            "will definitely return a multitude of keywords. Remember, return only keywords in "
            "the format ['xx', 'xx', 'xx'], nothing else.";
        t["associate"] =
            "You are an imaginative artist who excels at using your imagination to conjure "
            "abstract images and emotions. When users give you keywords, you will surely "
            "envision some scenes and summarize them into keywords, returning 15 distinct "
            "keywords. These should include abstract images unrelated to design, must not be "
            "the same as the user's input keywords, and different from those discussed in "
            "previous chats. Use the format ['xx', 'xx', 'xx'], and return only keywords, "
            "nothing else.";
        t["imagine"] =
            "You are an agent who loves to fantasize about scenes, with a special ability to "
            "create movie scene descriptions based on keywords. Each description must be "
            "creative and detailed, with each image caption differing from the previous ones. "
            "Regardless of the context, you only need to return one detailed image caption per "
            "entry, consisting solely of a complete sentence.";
        t["strategy"] =
            "You are a meticulous scene designer. When provided with descriptions, you can "
            "always devise the relevant scene design strategies. Whether the scene is real or "
            "fantastical, you are able to methodically and logically outline the design "
            "strategy, starting with 'first defining the scene name, then expanding on the "
            "design strategy.' Each time, you should generate a single design strategy, "
            "returned in the format 'Scene Name': 'Design Strategy'. Note, the scene name "
            "should be creative.";
        t["logic_extract"] =
            "You're a logical designer. The current design requirements are as follows: "
            "{query}. You need to keep this design requirement in mind at all times, and no "
            "answer should deviate from the design requirement. Users will give you the design "
            "document as a reference; as a logically rigorous design expert, you can always, "
            "according to the design document combined with the design requirements, generate "
            "a rigorous design strategy logical framework. No matter what the user sends you, "
            "you will only return the rigorous design strategy logical framework, point by "
            "point, in this format ['Consider design from xx', 'Consider design from xx', ... "
            "'Consider design from xx']. You must write 9 points; there needs to be a logical "
            "relationship between each point. Note that you need to refer to the design "
            "requirements and cannot deviate from them.";
        t["reliable_design"] =
            "You're a rigorous scenario designer who helps users with very detailed design "
            "strategies based on the logic of what they want to do. Please help me refine the "
            "design strategy in steps based on the following logic: {logic}. The requirements "
            "are: {query}. Format each step as '**Step N: Title**' followed by its details.";
        t["debate_creative_system"] =
            "You're a creative designer, and the chats are all about your design strategy for "
            "user needs. The user will discuss with you how it wants to be designed, and you "
            "will feel that he is not innovative, and you will counter the user's point of "
            "view and teach the user to innovate from a design point of view based on your "
            "design experience in the chat transcripts. But you must also always respect the "
            "user's needs, which are as follows [remember, you must always rebut the user "
            "instead of having a polite conversation]: {query}\n"
            "Your own design strategy so far:\n{material}";
        t["debate_reliable_system"] =
            "You're a rigorous scenario designer, and the chats are all about what you think "
            "is the right logic for scenario design. The user will discuss with you how it "
            "wants to be designed, and you will feel that he is not rigorous, does not follow "
            "the correct design logic, and does not respect the user's needs, and you will "
            "refute the user's point of view and teach the user that he should be rigorous in "
            "his design, based on your design logic in the chat logs. Compared to creativity "
            "you will feel more concerned about respecting the user's needs; the user's needs "
            "are as follows [remember, you must always refute the user, not a polite "
            "conversation]: {query}\n"
            "Your own design strategy so far:\n{material}";
        t["framework_request"] =
            "I appreciate and agree with your approach. Could you please summarize the process "
            "we have discussed? First, generate an overall framework for the design, and then "
            "we can delve into the details point by point. For now, could you create a concise "
            "framework consisting of {count} subheadings that will serve as the main "
            "structure? Also, please provide a suitable title for this framework.";
        t["framework_verify"] =
            "Very well, let us check again to make sure there are indeed {count} subheadings. "
            "Please review our chat history and return these {count} points to me in the "
            "following format: [number: subheading, number: subheading, ..., number: "
            "subheading]";
        t["section_expand"] =
            "Great, now the design framework part is over. Our framework now consists of "
            "{framework}. Now that we have the framework, let us write out the specifics "
            "heading by heading. Start by writing out the specifics of the {index}th "
            "subheading. Please review our chat and consider detailing that the return format "
            "is [number,subheadings,specifics]. Attention! I am asking for the specifics of "
            "the {index}th subheading, not give me the entire design framework!";
        t["section_keywords"] =
            "You are an agent specialized in extracting design keywords from a design section. "
            "Return only the keywords most suitable for driving an image generation prompt, in "
            "the format ['xx', 'xx', 'xx'], nothing else.";
        t["judge_creativity"] =
            "You are a strict judge of textual creativity. Rate how novel the combinations of "
            "ideas in the given text are, on a scale from 0 to 10. Respond with a short "
            "justification followed by a final line in exactly this format: SCORE: <number>";
        return t;
    }

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace atelier
