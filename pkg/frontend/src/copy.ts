/** Student-facing copy for each step, kept out of the components so
 * instructors can reword it without touching code. */

export interface StepCopy {
  heading: string;
  blurb: string;
}

export const STEP_COPY: Record<number, StepCopy> = {
  1: {
    heading: "Collect your questions",
    blurb:
      "Think of the bot as a new student joining your class. First it needs the " +
      "reading material (one passage per topic) and lots of example questions, " +
      "each tagged with the topic where its answer lives.",
  },
  2: {
    heading: "Grow your data",
    blurb:
      "A photocopier with a twist: we translate each question into another " +
      "language and back, so the copy says the same thing in different words. " +
      "More varied examples make the bot harder to confuse.",
  },
  3: {
    heading: "Add house rules",
    blurb:
      "Some questions deserve the exact same answer every time, like how to log " +
      "in. Rules are like sticky notes on the bot's desk: if a keyword appears, " +
      "it reads the note instead of thinking.",
  },
  4: {
    heading: "Train the topic spotter",
    blurb:
      "Now the bot practices guessing topics. Each pass through your question " +
      "pile is one epoch; you choose how many passes it gets. Watch the loss " +
      "curve fall as its guesses improve.",
  },
  5: {
    heading: "Find answers in the text",
    blurb:
      "The extractive answerer is a highlighter: it can only mark words that " +
      "are already in the passage. Ask something and see exactly which words " +
      "it picks.",
  },
  6: {
    heading: "Write answers in new words",
    blurb:
      "The generative answerer is more like a storyteller: it reads the passage " +
      "and writes its own sentence. Compare both answerers on the same question " +
      "and decide which you trust.",
  },
  7: {
    heading: "Open your chatbot",
    blurb:
      "Everything is wired together: rules first, then the topic spotter, then " +
      "the answerer. Chat with your bot and inspect the trace to see which part " +
      "answered you.",
  },
};
