#include <destrike/word_corpus.hpp>

#include <destrike/errors.hpp>
#include <destrike/imaging.hpp>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace destrike {

namespace {

constexpr std::string_view kWordText =
    "the night was dark and cold when we reached castle through forest mountain river "
    "village window letter journal morning evening shadow silence garden carriage "
    "journey stranger doctor friend brother sister mother father children wolves "
    "howling moonlight midnight chapel coffin earth blood white pale strange fear "
    "terror horror danger safety strength weakness memory dream sleep awake open "
    "closed locked door key stone wall tower bridge road horse driver coachman "
    "passenger station train ship harbour storm wind rain snow thunder lightning "
    "candle lamp fire smoke ashes dust mirror picture portrait book paper pen ink "
    "diary record answer question reason madness patient asylum keeper master "
    "servant guest host dinner supper breakfast wine water bread meat table chair "
    "bed room house home street city london whitby england country abroad travel "
    "visit return arrive depart leave remain wait watch listen speak whisper shout "
    "laugh smile weep sorrow grief comfort hope faith prayer cross garlic holy "
    "sacred ancient modern science knowledge learned professor lawyer clerk business "
    "money gold silver coin purse box chest trunk baggage parcel message telegram "
    "urgent quickly slowly softly gently fiercely bravely wisely truly surely "
    "perhaps certainly indeed already always never sometimes often seldom again "
    "before after during since until while because although unless whether "
    "between among beneath beyond across around within without against toward "
    "north south east west valley hill cliff shore ocean island lake meadow field "
    "flower rose leaf branch tree oak pine grass heath moor marsh mist fog cloud "
    "star sun moon sky heaven hell spirit soul body heart mind hand face eyes "
    "teeth lips throat neck hair voice breath pulse wound mark scar sign token "
    "promise secret truth lie honour duty courage loyal gentle noble humble proud "
    "quiet restless weary eager anxious careful careless sudden gradual distant "
    "near far high low deep shallow narrow broad heavy light warm chill bitter "
    "sweet grave solemn cheerful gloomy wicked kindly cruel merciful terrible "
    "wonderful dreadful awful lovely";

}  // namespace

const std::vector<std::string>& builtin_words() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> out;
        std::istringstream in{std::string(kWordText)};
        std::string w;
        while (in >> w) {
            if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
        }
        return out;
    }();
    return words;
}

GrayImage render_word(std::string_view text, Rng& rng) {
    const int face = cv::FONT_HERSHEY_SCRIPT_SIMPLEX | cv::FONT_ITALIC;
    const double scale = rng.uniform(1.35, 1.6);
    const int thickness = static_cast<int>(rng.uniform_int(2, 3));
    const int ink = static_cast<int>(rng.uniform_int(10, 50));
    const std::string word(text);

    int baseline = 0;
    const cv::Size size = cv::getTextSize(word, face, scale, thickness, &baseline);
    const int margin = 12 + thickness;
    cv::Mat canvas(size.height + baseline + 2 * margin, size.width + 2 * margin, CV_8UC1,
                   cv::Scalar(255));
    cv::putText(canvas, word, cv::Point(margin, margin + size.height), face, scale,
                cv::Scalar(ink), thickness, cv::LINE_AA);

    cv::Mat inked;
    cv::threshold(canvas, inked, 250, 255, cv::THRESH_BINARY_INV);
    const cv::Rect box = cv::boundingRect(inked);
    if (box.area() == 0) throw Error("rendering produced no ink for '" + word + "'");
    const int pad = 6;
    const cv::Rect crop = cv::Rect(box.x - pad, box.y - pad, box.width + 2 * pad,
                                   box.height + 2 * pad) &
                          cv::Rect(0, 0, canvas.cols, canvas.rows);
    const cv::Mat cropped = canvas(crop);

    GrayImage out(cropped.rows, cropped.cols, Polarity::display);
    for (int r = 0; r < cropped.rows; ++r) {
        const auto* row = cropped.ptr<std::uint8_t>(r);
        for (int c = 0; c < cropped.cols; ++c) out.at(r, c) = static_cast<float>(row[c] / 255.0);
    }
    return out;
}

std::vector<RenderedWord> render_word_corpus(std::size_t offset, std::size_t count,
                                             std::uint64_t seed) {
    const auto& words = builtin_words();
    if (offset + count > words.size()) {
        throw ValidationError("requested words [" + std::to_string(offset) + ", " +
                              std::to_string(offset + count) + ") but only " +
                              std::to_string(words.size()) + " builtin words exist");
    }
    std::vector<RenderedWord> out;
    out.reserve(count);
    for (std::size_t i = offset; i < offset + count; ++i) {
        Rng rng(derive_seed(seed, words[i]));
        char id[16];
        std::snprintf(id, sizeof id, "w%04zu", i);
        out.push_back({std::string(id) + "_" + words[i], render_word(words[i], rng)});
    }
    return out;
}

void write_word_corpus(const std::filesystem::path& dir, std::size_t offset, std::size_t count,
                       std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    for (const RenderedWord& w : render_word_corpus(offset, count, seed)) {
        save_png(w.image, dir / (w.id + ".png"));
    }
}

}  // namespace destrike
